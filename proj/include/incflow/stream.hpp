#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "incflow/graph.hpp"

namespace incflow {

enum class ProblemKind { pnorm, maxflow, effres };

const char* to_string(ProblemKind kind);

// Vertices are 0-based here and 1-based in the text format.
struct StreamEdge {
  VertexId tail = 0;
  VertexId head = 0;
  std::optional<double> gradient;
  std::optional<double> resistance;
  std::optional<double> weight;
  std::optional<std::int64_t> capacity;

  // g = 0, r = 1, w = 1 where absent.
  EdgeWeights weights() const;

  friend bool operator==(const StreamEdge&, const StreamEdge&) = default;
};

struct UpdateStream {
  ProblemKind kind = ProblemKind::pnorm;
  std::size_t vertex_count = 0;
  std::size_t m_hat = 0;
  // pnorm
  int p = 2;
  double threshold = 0.0;
  // all kinds
  double eps = 0.0;
  // maxflow and effres
  VertexId s = 0;
  VertexId t = 0;
  double theta = 0.0;
  std::vector<std::pair<VertexId, double>> demand;
  std::vector<StreamEdge> initial;
  std::vector<StreamEdge> events;

  std::vector<double> dense_demand() const;
  PNormInstance pnorm_instance() const;

  friend bool operator==(const UpdateStream&, const UpdateStream&) = default;
};

// Line grammar:
//   problem pnorm n=<int> mmax=<int> p=<int> F=<real> eps=<real>
//   problem maxflow n=<int> mmax=<int> s=<v> t=<v> eps=<real>
//   problem effres n=<int> mmax=<int> s=<v> t=<v> theta=<real> eps=<real>
//   demand <v> <real>
//   edge <u> <v> [g=<real>] [r=<real>] [w=<real>] [cap=<int>]   (before start)
//   start
//   add <u> <v> [...]                                           (after start)
// '#' starts a comment. Errors are InputError with the line number.
UpdateStream parse_stream(std::string_view text);
UpdateStream read_stream(const std::string& path);
std::string print_stream(const UpdateStream& stream);

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace incflow
