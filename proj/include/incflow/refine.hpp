#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "incflow/graph.hpp"
#include "incflow/mrc.hpp"
#include "incflow/mwu.hpp"

namespace incflow {

// Local model of E(f + x) - E(f) around a flow f:
//   g = g0 + 2 r0^2 f + p w0^p |f|^(p-2) f,
//   r = sqrt(r0^2 + 2 p^2 w0^p |f|^(p-2)),  w = p w0,
// with |f|^0 = 1 for p = 2.
struct ResidualProblem {
  ObjectiveTerms terms;
};

ResidualProblem build_residual(const ObjectiveTerms& base,
                               std::span<const double> f);
// Residual attributes of one edge carrying no flow.
EdgeWeights residual_at_zero(const EdgeWeights& base, int p);

double residual_value(const ResidualProblem& residual,
                      std::span<const double> x);

struct ScaledWeights {
  std::vector<double> resistance;
  std::vector<double> weight;
};

// r' = 2 sqrt(R) r and w' = R^((p-1)/p) w. Throws InputError unless R > 0.
ScaledWeights residual_scaled_weights(const ResidualProblem& residual, double R);
std::pair<double, double> scale_edge(double r, double w, int p, double R);

struct SandwichResult {
  // E(f + x) - E(f) - R_f(x), should be <= 0.
  double upper_gap;
  // E(f + lambda x) - E(f) - lambda R_f(x), should be >= 0.
  double lower_gap;
  bool upper_ok;
  bool lower_ok;
};

// Both refinement inequalities at (f, x), with relative slack 1e-9.
SandwichResult refinement_sandwich(const ObjectiveTerms& base,
                                   std::span<const double> f,
                                   std::span<const double> x, double lambda);

// Starts from 16p and doubles until `samples` random triples (seeded) all
// satisfy both inequalities.
double calibrate_lambda(int p, std::uint64_t seed, std::size_t samples = 200);

enum class StepRule {
  // f + (R / 2K^2) c exactly.
  prescribed,
  // The better of the prescribed step and the exact minimizer of E along c.
  line_search,
};

struct RefineOptions {
  // 0 selects 16p, checked with calibrate_lambda.
  double lambda = 0.0;
  StepRule step_rule = StepRule::line_search;
  MrcOptions mrc;
  bool assert_invariants = false;
  // Edge bound for the MWU constants; 0 means the instance's current count.
  std::size_t m_hat = 0;
  std::function<void(const MwuTraceEvent&)> trace;
};

enum class VerdictKind { certified_above, flow };

struct Verdict {
  VerdictKind kind;
  std::vector<double> flow;  // empty unless kind == flow
  double energy = 0.0;
};

struct RefineDiagnostics {
  std::size_t steps = 0;
  std::size_t step_budget = 0;
  double lambda = 0.0;
  double K = 0.0;
  // Approximation factor of the MWU output; step sizes use this value.
  double step_K = 0.0;
  std::size_t contraction_violations = 0;
  // Largest (E(f') - F) / (E(f) - F) seen, and the largest allowed factor.
  double worst_contraction = 0.0;
  double contraction_bound = 0.0;
  // MWU output contract, worst values over all solutions: |<g, c> + 1|,
  // ||R' c||_2 / 2K and ||W' c||_p / 2K.
  double worst_gradient_error = 0.0;
  double worst_r_norm = 0.0;
  double worst_w_norm = 0.0;
  std::size_t contract_violations = 0;
  std::size_t mwu_runs = 0;
  MwuDiagnostics mwu;
  // Final potentials of completed MWU runs, as fractions of 4K^2 and 5qK^q.
  double worst_final_phi = 0.0;
  double worst_final_psi = 0.0;
  // Initial potentials against K^2 m / m_hat and K^q m / m_hat.
  double worst_initial_phi_error = 0.0;
  double worst_initial_psi_error = 0.0;
  std::size_t mrc_queries = 0;
  std::size_t mrc_solves = 0;
  std::size_t mwu_iterations = 0;
};

struct StepOutcome {
  std::vector<double> flow;
  double energy;
  double step;
};

// One refinement step along c with <g, c> = -1 (checked). Step size R / 2K^2,
// or the line-search improvement of it.
StepOutcome refinement_step(const ObjectiveTerms& base,
                            const ResidualProblem& residual,
                            std::span<const double> f, std::span<const double> c,
                            double R, double K, StepRule rule);

// Incremental thresholded p-norm flow. After initialize() and after every
// insertion exactly one verdict: certified_above means every flow routing the
// demand on the current graph has energy above F; flow carries f with
// E(f) <= F + eps.
class IncrementalPNorm {
 public:
  IncrementalPNorm(PNormInstance instance, RefineOptions options);

  // Optional starting flow (must route the demand); defaults to the static
  // optimum once the demand is routable.
  Verdict initialize(std::optional<std::vector<double>> initial_flow = std::nullopt);
  Verdict insert_edge(VertexId u, VertexId v, const EdgeWeights& weights);

  const PNormInstance& instance() const { return instance_; }
  // Includes the counters of the MWU run still in progress.
  RefineDiagnostics diagnostics() const;

 private:
  Verdict advance();
  void start_mwu();
  void absorb_mwu(RefineDiagnostics& into, const IncrementalMwu& mwu) const;
  void violation(std::size_t& counter, const char* what);
  Verdict flow_verdict() const;

  PNormInstance instance_;
  RefineOptions options_;
  RefineDiagnostics diagnostics_;
  std::size_t m_hat_;
  bool started_ = false;
  bool met_ = false;
  bool has_flow_ = false;
  std::vector<double> flow_;
  double energy_ = 0.0;
  ResidualProblem residual_;
  double R_ = 0.0;
  std::optional<IncrementalMwu> mwu_;
};

struct PNormEvent {
  VertexId tail;
  VertexId head;
  EdgeWeights weights;
};

std::vector<Verdict> incremental_pnorm(PNormInstance instance,
                                       std::span<const PNormEvent> events,
                                       RefineOptions options = {});

}  // namespace incflow
