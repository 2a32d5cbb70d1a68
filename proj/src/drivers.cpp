#include "incflow/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "incflow/verify.hpp"

namespace incflow {

void accumulate(RefineDiagnostics& total, const RefineDiagnostics& part) {
  total.steps += part.steps;
  total.step_budget = std::max(total.step_budget, part.step_budget);
  total.lambda = std::max(total.lambda, part.lambda);
  total.K = std::max(total.K, part.K);
  total.step_K = std::max(total.step_K, part.step_K);
  total.contraction_violations += part.contraction_violations;
  total.worst_contraction = std::max(total.worst_contraction, part.worst_contraction);
  total.contraction_bound = std::max(total.contraction_bound, part.contraction_bound);
  total.worst_gradient_error = std::max(total.worst_gradient_error, part.worst_gradient_error);
  total.worst_r_norm = std::max(total.worst_r_norm, part.worst_r_norm);
  total.worst_w_norm = std::max(total.worst_w_norm, part.worst_w_norm);
  total.contract_violations += part.contract_violations;
  total.mwu_runs += part.mwu_runs;
  auto& a = total.mwu;
  const auto& b = part.mwu;
  a.iterations += b.iterations;
  a.stalls += b.stalls;
  a.insertions += b.insertions;
  a.potential_violations += b.potential_violations;
  a.monotonicity_violations += b.monotonicity_violations;
  a.domination_violations += b.domination_violations;
  a.length_pushes += b.length_pushes;
  a.worst_phi_step = std::max(a.worst_phi_step, b.worst_phi_step);
  a.worst_psi_step = std::max(a.worst_psi_step, b.worst_psi_step);
  total.worst_final_phi = std::max(total.worst_final_phi, part.worst_final_phi);
  total.worst_final_psi = std::max(total.worst_final_psi, part.worst_final_psi);
  total.worst_initial_phi_error =
      std::max(total.worst_initial_phi_error, part.worst_initial_phi_error);
  total.worst_initial_psi_error =
      std::max(total.worst_initial_psi_error, part.worst_initial_psi_error);
  total.mrc_queries += part.mrc_queries;
  total.mrc_solves += part.mrc_solves;
  total.mwu_iterations += part.mwu_iterations;
}

namespace {

RefineOptions refine_options(const DriverOptions& options, std::size_t m_hat,
                             double lambda) {
  RefineOptions out;
  out.lambda = lambda;
  out.mrc = options.mrc;
  out.assert_invariants = options.assert_invariants;
  out.trace = options.trace;
  out.m_hat = m_hat;
  return out;
}

}  // namespace

IncrementalMaxflow::IncrementalMaxflow(std::size_t vertex_count, VertexId s,
                                       VertexId t, double eps,
                                       DriverOptions options)
    : n_(vertex_count), s_(s), t_(t), eps_(eps), options_(std::move(options)),
      graph_(vertex_count) {
  if (s == t) throw InputError("maxflow: s equals t");
  if (s >= n_ || t >= n_) throw InputError("maxflow: terminal out of range");
  if (!(eps > 0.0 && eps <= 0.5)) throw InputError("maxflow: eps must lie in (0, 1/2]");
  if (options_.m_hat == 0) throw InputError("maxflow: edge bound must be positive");
  const double m_hat = static_cast<double>(options_.m_hat);
  p_ = std::max(2, static_cast<int>(std::ceil(2.0 * std::log(2.0 * m_hat) / eps)));
  // F = m e^(-eps p); the l2 padding costs at most F/4 on any flow of
  // congestion 1.
  threshold_ = m_hat * std::exp(-eps * p_);
  delta_ = std::exp(-eps * p_ / 2.0) / (2.0 * std::sqrt(m_hat));
  lambda_ = calibrate_lambda(p_, options_.mrc.seed);
}

EdgeWeights IncrementalMaxflow::weights(std::int64_t capacity) const {
  const double u = static_cast<double>(capacity);
  return {0.0, delta_ / u, 1.0 / u};
}

void IncrementalMaxflow::add_initial_edge(VertexId u, VertexId v,
                                          std::int64_t capacity) {
  if (started_) throw InputError("maxflow: initial edges must precede start()");
  if (capacity < 1) throw InputError("maxflow: capacities must be positive integers");
  if (graph_.edge_count() + 1 > options_.m_hat) throw InputError("maxflow: edge bound exceeded");
  graph_.add_edge(u, v);
  capacity_.push_back(capacity);
}

std::size_t IncrementalMaxflow::phase_bound() const {
  const double total = static_cast<double>(
      std::accumulate(capacity_.begin(), capacity_.end(), std::int64_t{0}));
  if (total < 1.0) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(total) / (eps_ / 2.0))) + 1;
}

MaxflowReport IncrementalMaxflow::begin_phase() {
  if (engine_) accumulate(finished_, engine_->diagnostics());
  engine_.reset();
  auto exact = exact_maxflow(graph_, capacity_, s_, t_);
  current_.value = exact.value;
  current_.flow = std::move(exact.flow);
  current_.restarted = false;
  if (exact.value == 0) return current_;
  ++phases_;
  current_.phase = phases_;
  current_.restarted = phases_ > 1;

  const double nu = static_cast<double>(exact.value);
  std::vector<double> demand(n_, 0.0);
  demand[s_] = -nu;
  demand[t_] = nu;
  PNormInstance instance(n_, std::move(demand), p_, threshold_, threshold_);
  for (EdgeId e = 0; e < graph_.edge_count(); ++e) {
    instance.add_edge(graph_.tails()[e], graph_.heads()[e], weights(capacity_[e]));
  }
  std::vector<double> flow(current_.flow.begin(), current_.flow.end());
  engine_.emplace(std::move(instance), refine_options(options_, options_.m_hat, lambda_));
  const auto verdict = engine_->initialize(std::move(flow));
  if (verdict.kind == VerdictKind::flow) {
    // A flow of value nu with congestion below e^(-eps/2) would contradict
    // the maxflow just computed.
    throw InvariantViolation("maxflow: threshold met right after a phase start");
  }
  return current_;
}

MaxflowReport IncrementalMaxflow::start() {
  if (started_) throw InputError("maxflow: already started");
  started_ = true;
  return begin_phase();
}

MaxflowReport IncrementalMaxflow::insert_edge(VertexId u, VertexId v,
                                              std::int64_t capacity) {
  if (!started_) throw InputError("maxflow: start() must come first");
  if (capacity < 1) throw InputError("maxflow: capacities must be positive integers");
  if (graph_.edge_count() + 1 > options_.m_hat) throw InputError("maxflow: edge bound exceeded");
  graph_.add_edge(u, v);
  capacity_.push_back(capacity);
  current_.flow.push_back(0);
  current_.restarted = false;
  if (!engine_) return begin_phase();
  const auto verdict = engine_->insert_edge(u, v, weights(capacity));
  if (verdict.kind == VerdictKind::flow) return begin_phase();
  return current_;
}

RefineDiagnostics IncrementalMaxflow::diagnostics() const {
  auto out = finished_;
  if (engine_) accumulate(out, engine_->diagnostics());
  return out;
}

IncrementalEffRes::IncrementalEffRes(std::size_t vertex_count, VertexId s,
                                     VertexId t, double theta, double eps_rel,
                                     DriverOptions options, double gamma)
    : n_(vertex_count), s_(s), t_(t), theta_(theta), eps_rel_(eps_rel),
      gamma_(gamma), options_(std::move(options)) {
  if (!(theta > 0.0)) throw InputError("effres: theta must be positive");
  if (!(eps_rel > 0.0)) throw InputError("effres: eps must be positive");
  if (s == t) throw InputError("effres: s equals t");
  if (s >= n_ || t >= n_) throw InputError("effres: terminal out of range");
  if (options_.m_hat == 0) throw InputError("effres: edge bound must be positive");
  lambda_ = calibrate_lambda(2, options_.mrc.seed);
}

EdgeWeights IncrementalEffRes::weights(double resistance) const {
  if (!(resistance > 0.0)) throw InputError("effres: resistances must be positive");
  const double r = std::sqrt(resistance);
  return {0.0, r, gamma_ * r};
}

void IncrementalEffRes::add_initial_edge(VertexId u, VertexId v, double resistance) {
  if (engine_) throw InputError("effres: initial edges must precede start()");
  weights(resistance);
  initial_.push_back({{u, v}, resistance});
}

EffResReport IncrementalEffRes::report(const Verdict& verdict) {
  EffResReport out;
  if (verdict.kind == VerdictKind::flow) {
    out.verdict = EffResVerdict::below;
    out.flow = verdict.flow;
    for (std::size_t e = 0; e < out.flow.size(); ++e) {
      out.estimate += resistance_[e] * out.flow[e] * out.flow[e];
    }
    below_ = true;
  } else if (below_) {
    throw InvariantViolation("effres: verdict went back above the threshold");
  }
  return out;
}

EffResReport IncrementalEffRes::start() {
  if (engine_) throw InputError("effres: already started");
  std::vector<double> demand(n_, 0.0);
  demand[s_] = -1.0;
  demand[t_] = 1.0;
  PNormInstance instance(n_, std::move(demand), 2, theta_, eps_rel_ * theta_);
  for (const auto& [edge, res] : initial_) {
    instance.add_edge(edge.tail, edge.head, weights(res));
    resistance_.push_back(res);
  }
  engine_.emplace(std::move(instance), refine_options(options_, options_.m_hat, lambda_));
  return report(engine_->initialize());
}

EffResReport IncrementalEffRes::insert_edge(VertexId u, VertexId v,
                                            double resistance) {
  if (!engine_) throw InputError("effres: start() must come first");
  const auto w = weights(resistance);
  auto verdict = engine_->insert_edge(u, v, w);
  resistance_.push_back(resistance);
  return report(verdict);
}

RefineDiagnostics IncrementalEffRes::diagnostics() const {
  RefineDiagnostics out;
  if (engine_) accumulate(out, engine_->diagnostics());
  return out;
}

}  // namespace incflow
