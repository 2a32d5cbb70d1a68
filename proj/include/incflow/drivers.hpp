#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "incflow/refine.hpp"

namespace incflow {

// Folds the counters of `part` into `total` (sums and maxima).
void accumulate(RefineDiagnostics& total, const RefineDiagnostics& part);

struct DriverOptions {
  std::size_t m_hat = 0;
  MrcOptions mrc;
  bool assert_invariants = false;
  std::function<void(const MwuTraceEvent&)> trace;
};

struct MaxflowReport {
  std::int64_t value = 0;
  // Signed along each edge's orientation, |flow_e| <= cap_e.
  std::vector<std::int64_t> flow;
  std::size_t phase = 0;
  bool restarted = false;
};

// Incremental (1 - eps)-approximate s-t maxflow on an undirected capacitated
// graph. Each phase starts from an exact maxflow of value nu and watches the
// p-norm instance with demand nu (chi_t - chi_s), w = 1/u and r = delta/u; the
// phase flow stays published while its energy threshold is certified out of
// reach, and a new phase starts once a flow below the threshold exists.
class IncrementalMaxflow {
 public:
  IncrementalMaxflow(std::size_t vertex_count, VertexId s, VertexId t,
                     double eps, DriverOptions options);

  void add_initial_edge(VertexId u, VertexId v, std::int64_t capacity);
  MaxflowReport start();
  MaxflowReport insert_edge(VertexId u, VertexId v, std::int64_t capacity);

  int p() const { return p_; }
  double threshold() const { return threshold_; }
  std::size_t phases() const { return phases_; }
  // ceil(ln(total capacity) / (eps / 2)) + 1 for the current graph.
  std::size_t phase_bound() const;
  RefineDiagnostics diagnostics() const;

 private:
  MaxflowReport begin_phase();
  EdgeWeights weights(std::int64_t capacity) const;

  std::size_t n_;
  VertexId s_;
  VertexId t_;
  double eps_;
  DriverOptions options_;
  int p_ = 0;
  double delta_ = 0.0;
  double threshold_ = 0.0;
  double lambda_ = 0.0;
  IncrementalGraph graph_;
  std::vector<std::int64_t> capacity_;
  bool started_ = false;
  std::size_t phases_ = 0;
  MaxflowReport current_;
  std::optional<IncrementalPNorm> engine_;
  RefineDiagnostics finished_;
};

enum class EffResVerdict { above, below };

struct EffResReport {
  EffResVerdict verdict = EffResVerdict::above;
  std::vector<double> flow;  // unit s-t flow, only when below
  // sum_e resistance_e flow_e^2, only when below.
  double estimate = 0.0;
};

// Detects the first insertion after which the s-t effective resistance is
// below theta: the p = 2 instance with r = sqrt(resistance), w = gamma r,
// g = 0, unit s-t demand, F = theta and eps = eps_rel theta.
class IncrementalEffRes {
 public:
  IncrementalEffRes(std::size_t vertex_count, VertexId s, VertexId t,
                    double theta, double eps_rel, DriverOptions options,
                    double gamma = 1e-6);

  void add_initial_edge(VertexId u, VertexId v, double resistance);
  EffResReport start();
  EffResReport insert_edge(VertexId u, VertexId v, double resistance);

  RefineDiagnostics diagnostics() const;

 private:
  EffResReport report(const Verdict& verdict);
  EdgeWeights weights(double resistance) const;

  std::size_t n_;
  VertexId s_;
  VertexId t_;
  double theta_;
  double eps_rel_;
  double gamma_;
  double lambda_ = 0.0;
  DriverOptions options_;
  std::vector<std::pair<Edge, double>> initial_;
  std::vector<double> resistance_;
  std::optional<IncrementalPNorm> engine_;
  bool below_ = false;
};

}  // namespace incflow
