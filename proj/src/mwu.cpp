#include "incflow/mwu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace incflow {

namespace {

// x^k for x > 0; exponents above 30 go through log space.
double power(double x, double k) {
  if (x == 0.0) return k == 0.0 ? 1.0 : 0.0;
  if (k > 30.0) return std::exp(k * std::log(x));
  return std::pow(x, k);
}

constexpr double kSlack = 1e-9;

}  // namespace

double MwuConstants::good_solution_bound() const {
  return 20.0 * q * power(K, q - 1.0);
}

MwuConstants mwu_constants(int p, std::size_t m_hat, double kappa) {
  if (p < 2) throw InputError("mwu: p must be at least 2");
  if (m_hat == 0) throw InputError("mwu: edge bound must be positive");
  if (!(kappa >= 1.0)) throw InputError("mwu: kappa must be >= 1");
  const int log_m = static_cast<int>(std::floor(std::log2(static_cast<double>(m_hat))));
  const int q = std::max(1, std::min(log_m, p));
  const double K = 100.0 * q * kappa;
  const double alpha = power(K, 1.0 - q) / (40.0 * q);
  return MwuConstants{p, q, kappa, K, alpha, static_cast<std::size_t>(100) * q * m_hat,
                      m_hat};
}

IncrementalMwu::IncrementalMwu(const IncrementalGraph& graph,
                               std::vector<double> gradient,
                               std::vector<double> resistance,
                               std::vector<double> weight, int p,
                               std::size_t m_hat, MwuOptions options)
    : constants_(mwu_constants(p, m_hat, options.mrc.kappa)),
      options_(std::move(options)) {
  const auto m = graph.edge_count();
  if (gradient.size() != m || resistance.size() != m || weight.size() != m) {
    throw InputError("mwu: attribute vectors do not match the edge count");
  }
  if (m > m_hat) throw InputError("mwu: graph already exceeds the edge bound");
  for (std::size_t e = 0; e < m; ++e) append_edge(gradient[e], resistance[e], weight[e]);

  MrcInstance instance(graph.vertex_count());
  for (EdgeId e = 0; e < m; ++e) {
    instance.add_edge(graph.tails()[e], graph.heads()[e], gradient_[e], estimate_[e]);
  }
  oracle_.emplace(std::move(instance), constants_.alpha, options_.mrc);
  diagnostics_.initial_phi = phi();
  diagnostics_.initial_psi = psi();
  const double phi_expected = constants_.K * constants_.K * static_cast<double>(m) /
                              static_cast<double>(m_hat);
  const double psi_expected = power(constants_.K, constants_.q) *
                              static_cast<double>(m) / static_cast<double>(m_hat);
  if (std::abs(diagnostics_.initial_phi - phi_expected) > 1e-9 * phi_expected ||
      std::abs(diagnostics_.initial_psi - psi_expected) > 1e-9 * psi_expected) {
    violation(diagnostics_.potential_violations, "initial potentials");
  }
}

void IncrementalMwu::violation(std::size_t& counter, const std::string& what) {
  ++counter;
  if (options_.assert_invariants) {
    throw InvariantViolation("mwu iteration " + std::to_string(iteration_) +
                             ": " + what);
  }
}

double IncrementalMwu::edge_length(std::size_t e) const {
  const int q = constants_.q;
  const double r = resistance_[e];
  const double w = weight_[e];
  return power(constants_.K, q - 2.0) * r * r * a_[e] +
         w * power(w * b_[e], q - 1.0);
}

void IncrementalMwu::append_edge(double g, double r, double w) {
  if (!(r > 0.0) || !(w > 0.0)) throw InputError("mwu: weights must be positive");
  const double m_hat = static_cast<double>(constants_.m_hat);
  gradient_.push_back(g);
  resistance_.push_back(r);
  weight_.push_back(w);
  a_.push_back(constants_.K / std::sqrt(m_hat) / r);
  b_.push_back(constants_.K * power(m_hat, -1.0 / constants_.q) / w);
  circulation_.push_back(0.0);
  length_.push_back(edge_length(a_.size() - 1));
  estimate_.push_back(length_.back());
}

void IncrementalMwu::insert_edge(EdgeId e, const MwuEvent& event) {
  if (e != gradient_.size()) {
    throw InputError("mwu: edge " + std::to_string(e) +
                     " is not the next edge id (" + std::to_string(gradient_.size()) + ")");
  }
  if (gradient_.size() + 1 > constants_.m_hat) {
    throw InputError("mwu: insertion exceeds the edge bound");
  }
  append_edge(event.gradient, event.resistance, event.weight);
  oracle_->insert_edge(event.tail, event.head, event.gradient, estimate_.back());
  ++diagnostics_.insertions;
}

double IncrementalMwu::phi() const {
  double s = 0.0;
  for (std::size_t e = 0; e < a_.size(); ++e) {
    const double ra = resistance_[e] * a_[e];
    s += ra * ra;
  }
  return s;
}

double IncrementalMwu::psi() const {
  double s = 0.0;
  for (std::size_t e = 0; e < b_.size(); ++e) {
    s += power(weight_[e] * b_[e], constants_.q);
  }
  return s;
}

double IncrementalMwu::current_length(std::span<const double> c) const {
  double s = 0.0;
  for (std::size_t e = 0; e < c.size(); ++e) s += length_[e] * std::abs(c[e]);
  return s;
}

double IncrementalMwu::length_after(std::size_t e, double step) const {
  const int q = constants_.q;
  const double r = resistance_[e];
  const double w = weight_[e];
  return power(constants_.K, q - 2.0) * r * r * (a_[e] + step) +
         w * power(w * (b_[e] + step), q - 1.0);
}

MwuStep IncrementalMwu::step() { return advance(1) > 0 ? MwuStep::progress : MwuStep::stalled; }

std::size_t IncrementalMwu::advance(std::size_t limit) {
  if (finished()) throw InputError("mwu: all T iterations already done");
  const auto& K = constants_.K;
  const auto q = constants_.q;
  const double T = static_cast<double>(constants_.T);
  const double target = -constants_.alpha / constants_.kappa;
  limit = std::min(limit, constants_.T - iteration_);
  if (limit == 0) return 0;

  auto found = oracle_->query();
  if (!found || !(found->ratio <= target * (1.0 - 1e-12))) {
    ++diagnostics_.stalls;
    return 0;
  }
  // Scale to <g, delta> = -1.
  delta_ = found->cycle;
  const double slope = delta_.dot(gradient_);
  if (!(slope < 0.0)) {
    throw InvariantViolation("mwu: oracle returned a cycle with non-negative gradient");
  }
  delta_.scale(-1.0 / slope);
  const double estimated_length = delta_.weighted_l1(estimate_);
  if (estimated_length > constants_.kappa / constants_.alpha * (1.0 + kSlack)) {
    violation(diagnostics_.potential_violations, "scaled cycle exceeds kappa / alpha");
  }

  // The oracle answer only changes when an estimate is pushed, so the same
  // delta is applied for k consecutive iterations: up to the first one after
  // which some length exceeds its estimate.
  std::size_t k = limit;
  for (const auto& term : delta_.terms()) {
    const auto e = term.edge;
    const double step = std::abs(term.value) / T;
    if (step == 0.0 || length_after(e, static_cast<double>(k) * step) <= estimate_[e]) continue;
    std::size_t lo = 0;  // lengths after lo steps stay within the estimate
    std::size_t hi = k;  // and exceed it after hi steps
    while (hi - lo > 1) {
      const auto mid = lo + (hi - lo) / 2;
      if (length_after(e, static_cast<double>(mid) * step) > estimate_[e]) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    k = hi;
  }

  const double batch = static_cast<double>(k);
  double phi_increase = 0.0;
  double psi_increase = 0.0;
  std::vector<IncreaseLength> pushes;
  for (const auto& term : delta_.terms()) {
    const auto e = term.edge;
    const double step = std::abs(term.value) / T;
    const double r = resistance_[e];
    const double w = weight_[e];
    // Increase during the last iteration of the batch, the largest one:
    // r^2((a + s)^2 - a^2) and (w b)^q((1 + s/b)^q - 1) at a, b before it.
    const double a_last = a_[e] + (batch - 1.0) * step;
    const double b_last = b_[e] + (batch - 1.0) * step;
    phi_increase += r * r * step * (2.0 * a_last + step);
    psi_increase += power(w * b_last, q) * std::expm1(q * std::log1p(step / b_last));
    circulation_[e] += batch * term.value / T;
    a_[e] += batch * step;
    b_[e] += batch * step;
    const double previous = length_[e];
    length_[e] = edge_length(e);
    if (length_[e] < previous) {
      violation(diagnostics_.monotonicity_violations, "length decreased");
    }
    if (length_[e] > estimate_[e]) {
      estimate_[e] = 2.0 * length_[e];
      pushes.push_back({e, estimate_[e]});
    }
    if (!(length_[e] <= estimate_[e] && estimate_[e] <= 2.0 * length_[e])) {
      violation(diagnostics_.monotonicity_violations, "estimate outside [l, 2l]");
    }
    if (a_[e] < std::abs(circulation_[e]) * (1.0 - kSlack) ||
        b_[e] < std::abs(circulation_[e]) * (1.0 - kSlack)) {
      violation(diagnostics_.domination_violations, "a or b below |c|");
    }
  }
  for (const auto& push : pushes) oracle_->increase_length(push.edge, push.length);
  diagnostics_.length_pushes += pushes.size();

  const double phi_bound = 3.0 * K * K / T;
  const double psi_bound = 4.0 * q * power(K, q) / T;
  diagnostics_.worst_phi_step = std::max(diagnostics_.worst_phi_step, phi_increase / phi_bound);
  diagnostics_.worst_psi_step = std::max(diagnostics_.worst_psi_step, psi_increase / psi_bound);
  if (phi_increase > phi_bound * (1.0 + kSlack)) {
    violation(diagnostics_.potential_violations, "phi increase above 3K^2/T");
  }
  if (psi_increase > psi_bound * (1.0 + kSlack)) {
    violation(diagnostics_.potential_violations, "psi increase above 4qK^q/T");
  }
  iteration_ += k;
  diagnostics_.iterations += k;
  ++diagnostics_.batches;
  if (options_.trace) {
    options_.trace({iteration_, phi(), psi(), found->ratio});
  }
  if (finished()) {
    if (phi() > 4.0 * K * K * (1.0 + kSlack) ||
        psi() > 5.0 * q * power(K, q) * (1.0 + kSlack)) {
      violation(diagnostics_.potential_violations, "final potential bound");
    }
    // Averaging T unit-gradient cycles leaves <g, c> = -1 up to rounding;
    // remove the drift.
    long double dot = 0.0L;
    for (std::size_t e = 0; e < circulation_.size(); ++e) {
      dot += static_cast<long double>(gradient_[e]) * circulation_[e];
    }
    const double fix = static_cast<double>(-1.0L / dot);
    for (auto& x : circulation_) x *= fix;
  }
  return k;
}

std::optional<std::vector<double>> IncrementalMwu::run_until_blocked() {
  while (!finished()) {
    if (advance(constants_.T) == 0) return std::nullopt;
  }
  return circulation_;
}

MwuRunResult IncrementalMwu::run(MwuEventSource& source) {
  while (true) {
    if (auto c = run_until_blocked()) return {true, std::move(*c)};
    source.certified();
    auto event = source.next();
    if (!event) return {false, {}};
    insert_edge(static_cast<EdgeId>(gradient_.size()), *event);
  }
}

}  // namespace incflow
