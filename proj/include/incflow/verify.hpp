#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "incflow/graph.hpp"

namespace incflow {

struct OracleReport {
  double optimum = 0.0;
  std::vector<double> flow;
  std::size_t iterations = 0;
  // Euclidean norm of the objective gradient projected on the cycle space.
  double gradient_norm = 0.0;
  bool converged = false;
};

// Minimizes <g, f> + ||R f||_2^2 + ||W f||_p^p over flows routing `demand`.
// Iterates stay exactly feasible: f = tree routing + fundamental cycles, with
// damped Newton steps on the cycle coordinates. The seed picks the tree (0
// keeps edge order). Dense linear algebra, meant for small graphs.
OracleReport static_pnorm_opt(const IncrementalGraph& graph,
                              const ObjectiveTerms& terms,
                              std::span<const double> demand, double tol = 1e-9,
                              std::uint64_t seed = 0);
OracleReport static_pnorm_opt(const PNormInstance& instance, double tol = 1e-9,
                              std::uint64_t seed = 0);

struct MaxflowResult {
  std::int64_t value = 0;
  // Signed, along each edge's tail -> head orientation.
  std::vector<std::int64_t> flow;
};

// Dinic on the undirected graph; every edge can carry up to its capacity in
// either direction.
MaxflowResult exact_maxflow(const IncrementalGraph& graph,
                            std::span<const std::int64_t> capacity, VertexId s,
                            VertexId t);

// Grounded Laplacian solve on the component of s.
double effective_resistance(const IncrementalGraph& graph,
                            std::span<const double> resistance, VertexId s,
                            VertexId t);

// Worst |analytic - central difference| / max(1, |analytic|) over edges.
double finite_diff_check(const ObjectiveTerms& terms, std::span<const double> f,
                         double h);
double finite_diff_check(const ObjectiveTerms& terms, std::span<const double> f,
                         std::span<const double> analytic, double h);

}  // namespace incflow
