#include "incflow/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "incflow/random.hpp"
#include "incflow/verify.hpp"

namespace incflow {

namespace {

// |x|^k with the convention |x|^0 = 1.
double abs_pow(double x, double k) {
  if (k == 0.0) return 1.0;
  return std::pow(std::abs(x), k);
}

double directional_derivative(const ObjectiveTerms& base,
                              std::span<const double> f,
                              std::span<const double> c, double eta,
                              std::vector<double>& scratch) {
  for (std::size_t e = 0; e < f.size(); ++e) scratch[e] = f[e] + eta * c[e];
  const auto grad = objective_gradient(base, scratch);
  double s = 0.0;
  for (std::size_t e = 0; e < f.size(); ++e) s += grad[e] * c[e];
  return s;
}

}  // namespace

ResidualProblem build_residual(const ObjectiveTerms& base,
                               std::span<const double> f) {
  if (f.size() != base.size()) throw InputError("build_residual: flow size mismatch");
  const double p = base.p;
  ResidualProblem res;
  res.terms.p = base.p;
  for (std::size_t e = 0; e < f.size(); ++e) {
    const double r0 = base.resistance[e];
    const double wp = std::pow(base.weight[e], p);
    const double curv = abs_pow(f[e], p - 2.0);
    res.terms.push_back(base.gradient[e] + 2.0 * r0 * r0 * f[e] + p * wp * curv * f[e],
                        std::sqrt(r0 * r0 + 2.0 * p * p * wp * curv),
                        p * base.weight[e]);
  }
  return res;
}

EdgeWeights residual_at_zero(const EdgeWeights& base, int p) {
  ObjectiveTerms one;
  one.p = p;
  one.push_back(base.gradient, base.resistance, base.weight);
  const double zero = 0.0;
  const auto res = build_residual(one, std::span<const double>(&zero, 1));
  return {res.terms.gradient[0], res.terms.resistance[0], res.terms.weight[0]};
}

double residual_value(const ResidualProblem& residual,
                      std::span<const double> x) {
  return evaluate(residual.terms, x);
}

std::pair<double, double> scale_edge(double r, double w, int p, double R) {
  if (!(R > 0.0)) throw InputError("residual threshold must be positive");
  return {2.0 * std::sqrt(R) * r, std::pow(R, (p - 1.0) / p) * w};
}

ScaledWeights residual_scaled_weights(const ResidualProblem& residual, double R) {
  ScaledWeights out;
  const auto& t = residual.terms;
  for (std::size_t e = 0; e < t.size(); ++e) {
    auto [r, w] = scale_edge(t.resistance[e], t.weight[e], t.p, R);
    out.resistance.push_back(r);
    out.weight.push_back(w);
  }
  return out;
}

SandwichResult refinement_sandwich(const ObjectiveTerms& base,
                                   std::span<const double> f,
                                   std::span<const double> x, double lambda) {
  const auto res = build_residual(base, f);
  const double rx = residual_value(res, x);
  const double e0 = evaluate(base, f);
  std::vector<double> y(f.size());
  for (std::size_t e = 0; e < f.size(); ++e) y[e] = f[e] + x[e];
  const double e1 = evaluate(base, y);
  for (std::size_t e = 0; e < f.size(); ++e) y[e] = f[e] + lambda * x[e];
  const double e2 = evaluate(base, y);
  // Relative slack 1e-9 on the residual side plus the rounding of the energy
  // differences themselves.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  SandwichResult out;
  out.upper_gap = e1 - e0 - rx;
  out.lower_gap = e2 - e0 - lambda * rx;
  out.upper_ok = out.upper_gap <= 1e-9 * std::abs(rx) + 8 * eps * (std::abs(e0) + std::abs(e1));
  out.lower_ok = out.lower_gap >=
                 -(1e-9 * lambda * std::abs(rx) + 8 * eps * (std::abs(e0) + std::abs(e2)));
  return out;
}

double calibrate_lambda(int p, std::uint64_t seed, std::size_t samples) {
  double lambda = 16.0 * p;
  for (int round = 0; round < 16; ++round) {
    std::mt19937_64 rng(derive_seed(seed, p, round));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool ok = true;
    for (std::size_t s = 0; s < samples && ok; ++s) {
      const std::size_t m = 1 + rng() % 6;
      ObjectiveTerms terms;
      terms.p = p;
      std::vector<double> f(m), x(m);
      const double scale = std::pow(10.0, -2.0 + 3.0 * unit(rng));
      for (std::size_t e = 0; e < m; ++e) {
        terms.push_back(4.0 * unit(rng) - 2.0, 0.05 + 2.0 * unit(rng),
                        0.05 + 2.0 * unit(rng));
        f[e] = scale * (2.0 * unit(rng) - 1.0);
        // Every fourth sample moves some coordinates exactly to zero.
        x[e] = (s % 4 == 0 && e % 2 == 0) ? -f[e] / lambda
                                          : scale * (2.0 * unit(rng) - 1.0);
      }
      const auto r = refinement_sandwich(terms, f, x, lambda);
      ok = r.upper_ok && r.lower_ok;
    }
    if (ok) return lambda;
    lambda *= 2.0;
  }
  throw InvariantViolation("calibrate_lambda: no lambda satisfies the refinement inequalities");
}

StepOutcome refinement_step(const ObjectiveTerms& base,
                            const ResidualProblem& residual,
                            std::span<const double> f, std::span<const double> c,
                            double R, double K, StepRule rule) {
  if (c.size() != f.size() || residual.terms.size() != f.size()) {
    throw InputError("refinement_step: size mismatch");
  }
  if (!(R > 0.0)) throw InputError("refinement_step: residual threshold must be positive");
  long double slope = 0.0L;
  for (std::size_t e = 0; e < c.size(); ++e) {
    slope += static_cast<long double>(residual.terms.gradient[e]) * c[e];
  }
  if (!(std::abs(slope + 1.0L) <= 1e-6L)) {
    throw InputError("refinement_step: direction must have <g, c> = -1, got " +
                     std::to_string(static_cast<double>(slope)));
  }
  const double eta0 = R / (2.0 * K * K);
  auto at = [&](double eta) {
    std::vector<double> y(f.size());
    for (std::size_t e = 0; e < f.size(); ++e) y[e] = f[e] + eta * c[e];
    return y;
  };
  StepOutcome out{at(eta0), 0.0, eta0};
  out.energy = evaluate(base, out.flow);
  if (rule == StepRule::prescribed) return out;

  // E(f + eta c) is convex in eta with negative slope at 0: bracket the root
  // of the derivative, then bisect.
  std::vector<double> scratch(f.size());
  double lo = 0.0;
  double hi = eta0;
  for (int i = 0; i < 200 && directional_derivative(base, f, c, hi, scratch) < 0.0; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (directional_derivative(base, f, c, mid, scratch) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double best = 0.5 * (lo + hi);
  auto flow = at(best);
  const double energy = evaluate(base, flow);
  if (energy < out.energy) out = {std::move(flow), energy, best};
  return out;
}

IncrementalPNorm::IncrementalPNorm(PNormInstance instance, RefineOptions options)
    : instance_(std::move(instance)), options_(std::move(options)) {
  m_hat_ = options_.m_hat ? options_.m_hat : instance_.graph().edge_count();
  if (m_hat_ == 0) throw InputError("refine: edge bound must be positive");
  if (instance_.graph().edge_count() > m_hat_) {
    throw InputError("refine: initial graph exceeds the edge bound");
  }
  if (!(instance_.error() > 0.0)) throw InputError("refine: eps must be positive");
  diagnostics_.lambda = options_.lambda > 0.0
                            ? options_.lambda
                            : calibrate_lambda(instance_.p(), options_.mrc.seed);
  diagnostics_.K = mwu_constants(instance_.p(), m_hat_, options_.mrc.kappa).K;
  diagnostics_.step_K = 2.0 * diagnostics_.K;
  const double k2 = diagnostics_.step_K * diagnostics_.step_K;
  diagnostics_.contraction_bound = 1.0 - 1.0 / (6.0 * k2 * diagnostics_.lambda);
}

void IncrementalPNorm::violation(std::size_t& counter, const char* what) {
  ++counter;
  if (options_.assert_invariants) throw InvariantViolation(std::string("refine: ") + what);
}

Verdict IncrementalPNorm::flow_verdict() const {
  return {VerdictKind::flow, flow_, energy_};
}

Verdict IncrementalPNorm::initialize(std::optional<std::vector<double>> initial_flow) {
  if (started_) throw InputError("refine: already initialized");
  started_ = true;
  if (initial_flow) {
    const auto d = net_demand(instance_.graph(), *initial_flow);
    double worst = 0.0;
    for (std::size_t v = 0; v < d.size(); ++v) {
      worst = std::max(worst, std::abs(d[v] - instance_.demand()[v]));
    }
    if (worst > 1e-8 * (1.0 + linf_norm(*initial_flow) + linf_norm(instance_.demand()))) {
      throw InputError("refine: initial flow does not route the demand");
    }
    flow_ = std::move(*initial_flow);
  } else {
    if (!instance_.demand_routable()) return {VerdictKind::certified_above, {}, 0.0};
    flow_ = static_pnorm_opt(instance_).flow;
  }
  has_flow_ = true;
  energy_ = energy(instance_, flow_);
  const double gap = (energy_ - instance_.threshold()) / instance_.error();
  const double k2 = diagnostics_.step_K * diagnostics_.step_K;
  const double budget = gap > 1.0 ? std::ceil(6.0 * k2 * diagnostics_.lambda * std::log(gap)) + 1.0
                                   : 1.0;
  // Large kappa can push the budget past the range of size_t.
  diagnostics_.step_budget = budget < 1e18 ? static_cast<std::size_t>(budget)
                                           : std::numeric_limits<std::size_t>::max();
  return advance();
}

Verdict IncrementalPNorm::insert_edge(VertexId u, VertexId v,
                                      const EdgeWeights& weights) {
  if (!started_) throw InputError("refine: initialize() must come first");
  if (instance_.graph().edge_count() + 1 > m_hat_) {
    throw InputError("refine: insertion exceeds the edge bound " + std::to_string(m_hat_));
  }
  const EdgeId e = instance_.add_edge(u, v, weights);
  if (!has_flow_) {
    // The demand was not routable so far.
    if (!instance_.demand_routable()) return {VerdictKind::certified_above, {}, 0.0};
    started_ = false;
    return initialize();
  }
  flow_.push_back(0.0);
  if (met_) return flow_verdict();
  const auto res = residual_at_zero(weights, instance_.p());
  residual_.terms.push_back(res.gradient, res.resistance, res.weight);
  if (mwu_) {
    const auto [r, w] = scale_edge(res.resistance, res.weight, instance_.p(), R_);
    mwu_->insert_edge(e, {u, v, res.gradient, r, w});
  }
  return advance();
}

void IncrementalPNorm::start_mwu() {
  residual_ = build_residual(instance_.terms(), flow_);
  R_ = (energy_ - instance_.threshold()) / diagnostics_.lambda;
  auto scaled = residual_scaled_weights(residual_, R_);
  MwuOptions mwu_options;
  mwu_options.mrc = options_.mrc;
  mwu_options.assert_invariants = options_.assert_invariants;
  mwu_options.trace = options_.trace;
  mwu_.emplace(instance_.graph(), residual_.terms.gradient, std::move(scaled.resistance),
               std::move(scaled.weight), instance_.p(), m_hat_, std::move(mwu_options));
  ++diagnostics_.mwu_runs;
  const auto& k = mwu_->constants();
  const double share = static_cast<double>(instance_.graph().edge_count()) /
                       static_cast<double>(m_hat_);
  const double phi0 = k.K * k.K * share;
  const double psi0 = std::pow(k.K, k.q) * share;
  const auto& d = mwu_->diagnostics();
  diagnostics_.worst_initial_phi_error =
      std::max(diagnostics_.worst_initial_phi_error, std::abs(d.initial_phi - phi0) / phi0);
  diagnostics_.worst_initial_psi_error =
      std::max(diagnostics_.worst_initial_psi_error, std::abs(d.initial_psi - psi0) / psi0);
}

void IncrementalPNorm::absorb_mwu(RefineDiagnostics& into,
                                  const IncrementalMwu& mwu) const {
  const auto& d = mwu.diagnostics();
  auto& t = into.mwu;
  t.iterations += d.iterations;
  t.stalls += d.stalls;
  t.insertions += d.insertions;
  t.potential_violations += d.potential_violations;
  t.monotonicity_violations += d.monotonicity_violations;
  t.domination_violations += d.domination_violations;
  t.length_pushes += d.length_pushes;
  t.worst_phi_step = std::max(t.worst_phi_step, d.worst_phi_step);
  t.worst_psi_step = std::max(t.worst_psi_step, d.worst_psi_step);
  into.mrc_queries += mwu.oracle().stats().queries;
  into.mrc_solves += mwu.oracle().stats().solves;
  into.mwu_iterations += d.iterations;
  if (mwu.finished()) {
    const auto& k = mwu.constants();
    into.worst_final_phi = std::max(into.worst_final_phi, mwu.phi() / (4.0 * k.K * k.K));
    into.worst_final_psi =
        std::max(into.worst_final_psi, mwu.psi() / (5.0 * k.q * std::pow(k.K, k.q)));
  }
}

RefineDiagnostics IncrementalPNorm::diagnostics() const {
  auto out = diagnostics_;
  if (mwu_) absorb_mwu(out, *mwu_);
  return out;
}

Verdict IncrementalPNorm::advance() {
  const double F = instance_.threshold();
  while (true) {
    if (energy_ <= F + instance_.error()) {
      met_ = true;
      if (mwu_) absorb_mwu(diagnostics_, *mwu_);
      mwu_.reset();
      return flow_verdict();
    }
    if (diagnostics_.steps >= diagnostics_.step_budget) {
      throw InvariantViolation("refine: step budget exhausted above the threshold");
    }
    if (!mwu_) start_mwu();
    auto c = mwu_->run_until_blocked();
    if (!c) return {VerdictKind::certified_above, {}, 0.0};

    // Output contract of the residual solver.
    const double K = mwu_->constants().K;
    long double slope = 0.0L;
    for (std::size_t e = 0; e < c->size(); ++e) {
      slope += static_cast<long double>(mwu_->gradient()[e]) * (*c)[e];
    }
    const double grad_error = static_cast<double>(std::abs(slope + 1.0L));
    const double r_norm = weighted_l2(mwu_->resistance(), *c) / (2.0 * K);
    const double w_norm = weighted_pnorm(mwu_->weight(), *c, instance_.p()) / (2.0 * K);
    diagnostics_.worst_gradient_error = std::max(diagnostics_.worst_gradient_error, grad_error);
    diagnostics_.worst_r_norm = std::max(diagnostics_.worst_r_norm, r_norm);
    diagnostics_.worst_w_norm = std::max(diagnostics_.worst_w_norm, w_norm);
    if (grad_error > 1e-9 || r_norm > 1.0 + 1e-9 || w_norm > 1.0 + 1e-9) {
      violation(diagnostics_.contract_violations, "residual solver output contract");
    }
    absorb_mwu(diagnostics_, *mwu_);
    mwu_.reset();

    // The contract is stated for the unscaled residual: c has
    // ||2 sqrt(R) R c||_2 <= 2K and ||R^((p-1)/p) W c||_p <= 2K.
    auto next = refinement_step(instance_.terms(), residual_, flow_, *c, R_,
                                diagnostics_.step_K, options_.step_rule);
    const double before = energy_ - F;
    const double after = next.energy - F;
    const double ratio = after / before;
    diagnostics_.worst_contraction = std::max(diagnostics_.worst_contraction, ratio);
    if (after > diagnostics_.contraction_bound * before + 1e-9 * std::abs(energy_)) {
      violation(diagnostics_.contraction_violations, "refinement step missed the contraction");
    }
    flow_ = std::move(next.flow);
    energy_ = next.energy;
    ++diagnostics_.steps;
  }
}

std::vector<Verdict> incremental_pnorm(PNormInstance instance,
                                       std::span<const PNormEvent> events,
                                       RefineOptions options) {
  if (options.m_hat == 0) options.m_hat = instance.graph().edge_count() + events.size();
  IncrementalPNorm engine(std::move(instance), std::move(options));
  std::vector<Verdict> out;
  out.push_back(engine.initialize());
  for (const auto& ev : events) out.push_back(engine.insert_edge(ev.tail, ev.head, ev.weights));
  return out;
}

}  // namespace incflow
