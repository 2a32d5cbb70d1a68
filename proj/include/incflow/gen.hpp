#pragma once

#include <cstdint>

#include "incflow/stream.hpp"

namespace incflow {

struct PNormGenOptions {
  std::size_t vertex_count = 8;
  // Extra initial edges on top of a random spanning tree.
  std::size_t extra_initial = 4;
  std::size_t events = 8;
  int p = 2;
  double eps = 1e-3;
  std::uint64_t seed = 0;
};

// Unit s-t demand over a spanning tree plus random edges; g in [-1, 1],
// r and w in [0.5, 2]. F sits below the initial optimum by a random 30-90% of
// its magnitude.
UpdateStream random_pnorm_stream(const PNormGenOptions& options);

// As above, with F midway between the initial and final optima so the
// threshold becomes reachable part way through. Solves two static instances.
UpdateStream planted_threshold_stream(const PNormGenOptions& options);

struct MaxflowGenOptions {
  std::size_t vertex_count = 8;
  std::size_t initial = 0;
  std::size_t events = 20;
  std::int64_t max_capacity = 8;
  double eps = 0.5;
  std::uint64_t seed = 0;
};

UpdateStream random_maxflow_stream(const MaxflowGenOptions& options);

// Insertions that keep opening new s-t routes, so the maxflow value grows
// in many small increments and phases restart often.
UpdateStream phase_stress_stream(const MaxflowGenOptions& options);

struct EffResGenOptions {
  std::size_t vertex_count = 8;
  std::size_t initial = 4;
  std::size_t events = 16;
  double eps = 0.1;
  std::uint64_t seed = 0;
};

// Random resistors in [0.5, 2]; theta is set to the effective resistance
// midway through the stream (or 1 when s and t only connect late).
UpdateStream random_effres_stream(const EffResGenOptions& options);

}  // namespace incflow
