#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "incflow/gen.hpp"
#include "incflow/refine.hpp"
#include "incflow/stream.hpp"
#include "incflow/verify.hpp"

using namespace incflow;

namespace {

ObjectiveTerms one_edge(int p, double g, double r, double w) {
  ObjectiveTerms t;
  t.p = p;
  t.push_back(g, r, w);
  return t;
}

// Two vertices, four parallel edges, one unit from 0 to 1.
PNormInstance parallel_instance(double F, double eps) {
  PNormInstance inst(2, {-1.0, 1.0}, 2, F, eps);
  inst.add_edge(0, 1, {1.0, 0.1, 0.1});
  for (int i = 0; i < 3; ++i) inst.add_edge(0, 1, {0.0, 0.1, 0.1});
  return inst;
}

}  // namespace

TEST_CASE("residual problem examples") {
  std::vector<double> f{2.0};
  auto res = build_residual(one_edge(2, 0.0, 1.0, 1.0), f);
  CHECK(res.terms.gradient[0] == doctest::Approx(8.0));
  CHECK(res.terms.resistance[0] == doctest::Approx(3.0));
  CHECK(res.terms.weight[0] == doctest::Approx(2.0));

  std::vector<double> zero{0.0};
  res = build_residual(one_edge(3, 0.7, 1.5, 2.0), zero);
  CHECK(res.terms.gradient[0] == 0.7);
  CHECK(res.terms.resistance[0] == doctest::Approx(1.5));
  CHECK(res.terms.weight[0] == doctest::Approx(6.0));

  res = build_residual(one_edge(2, 0.0, 1.0, 1.0), zero);
  CHECK(res.terms.resistance[0] == doctest::Approx(3.0));

  auto at_zero = residual_at_zero({0.7, 1.5, 2.0}, 3);
  CHECK(at_zero.gradient == 0.7);
  CHECK(at_zero.resistance == doctest::Approx(1.5));
  CHECK(at_zero.weight == doctest::Approx(6.0));
  CHECK(residual_at_zero({0.0, 1.0, 1.0}, 2).resistance == doctest::Approx(3.0));

  CHECK_THROWS_AS(build_residual(one_edge(2, 0.0, 1.0, 1.0), std::vector<double>{1.0, 2.0}),
                  InputError);
}

TEST_CASE("residual gradient is the objective gradient") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int p : {2, 3, 4, 8}) {
    ObjectiveTerms base;
    base.p = p;
    std::vector<double> f;
    for (int e = 0; e < 6; ++e) {
      base.push_back(u(rng), std::abs(u(rng)) + 0.1, std::abs(u(rng)) + 0.1);
      f.push_back(u(rng));
    }
    auto res = build_residual(base, f);
    auto grad = objective_gradient(base, f);
    for (int e = 0; e < 6; ++e) {
      CHECK(res.terms.gradient[e] == doctest::Approx(grad[e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("scaled weights examples") {
  ResidualProblem res{one_edge(2, 0.0, 3.0, 2.0)};
  auto s = residual_scaled_weights(res, 4.0);
  CHECK(s.resistance[0] == doctest::Approx(12.0));
  CHECK(s.weight[0] == doctest::Approx(4.0));

  s = residual_scaled_weights(res, 1.0);
  CHECK(s.resistance[0] == doctest::Approx(6.0));
  CHECK(s.weight[0] == doctest::Approx(2.0));

  res = ResidualProblem{one_edge(2, 0.0, 1.0, 1.0)};
  s = residual_scaled_weights(res, 0.25);
  CHECK(s.resistance[0] == doctest::Approx(1.0));
  CHECK(s.weight[0] == doctest::Approx(0.5));

  auto [r, w] = scale_edge(1.0, 1.0, 4, 16.0);
  CHECK(r == doctest::Approx(8.0));
  CHECK(w == doctest::Approx(8.0));

  CHECK_THROWS_AS(residual_scaled_weights(res, 0.0), InputError);
  CHECK_THROWS_AS(residual_scaled_weights(res, -1.0), InputError);
}

TEST_CASE("refinement sandwich on random triples") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int p : {2, 3, 4, 8}) {
    const double lambda = calibrate_lambda(p, 1);
    CHECK(lambda >= 16.0 * p);
    for (int trial = 0; trial < 100; ++trial) {
      ObjectiveTerms base;
      base.p = p;
      std::vector<double> f, x;
      const double scale = std::pow(10.0, u(rng));
      for (int e = 0; e < 5; ++e) {
        base.push_back(u(rng), std::abs(u(rng)) + 0.01, std::abs(u(rng)) + 0.01);
        f.push_back(u(rng));
        x.push_back(scale * u(rng));
      }
      auto s = refinement_sandwich(base, f, x, lambda);
      CHECK(s.upper_ok);
      CHECK(s.lower_ok);
    }
  }
}

TEST_CASE("refinement step examples") {
  auto inst = parallel_instance(-10.0, 1e-3);
  const std::vector<double> f{1.0, 0.0, 0.0, 0.0};
  auto res = build_residual(inst.terms(), f);
  const double g0 = res.terms.gradient[0];
  std::vector<double> c{-1.0 / g0, 1.0 / (3.0 * g0), 1.0 / (3.0 * g0), 1.0 / (3.0 * g0)};

  // R = 6K^2 with K = 1: step size R / 2K^2 = 3.
  auto out = refinement_step(inst.terms(), res, f, c, 6.0, 1.0, StepRule::prescribed);
  CHECK(out.step == doctest::Approx(3.0));
  CHECK(out.flow[0] == doctest::Approx(1.0 + 3.0 * c[0]));
  CHECK(out.energy == doctest::Approx(energy(inst, out.flow)));
  CHECK(out.energy < energy(inst, f));

  auto searched = refinement_step(inst.terms(), res, f, c, 6.0, 1.0, StepRule::line_search);
  CHECK(searched.energy <= out.energy);

  std::vector<double> zero(4, 0.0);
  CHECK_THROWS_AS(refinement_step(inst.terms(), res, f, zero, 6.0, 1.0, StepRule::prescribed),
                  InputError);
  CHECK_THROWS_AS(refinement_step(inst.terms(), res, f, c, 0.0, 1.0, StepRule::prescribed),
                  InputError);
}

TEST_CASE("threshold already met") {
  // E(f0) = 1.02 on edge 0 alone; the static optimum is far lower.
  auto inst = parallel_instance(5.0, 1e-3);
  RefineOptions o;
  o.m_hat = 5;
  IncrementalPNorm engine(inst, o);
  auto v = engine.initialize(std::vector<double>{1.0, 0.0, 0.0, 0.0});
  CHECK(v.kind == VerdictKind::flow);
  CHECK(v.flow == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  CHECK(engine.diagnostics().steps == 0);
  CHECK(engine.diagnostics().mwu_runs == 0);

  // Flow verdicts stay once met; new edges carry no flow.
  v = engine.insert_edge(1, 0, {0.0, 1.0, 1.0});
  CHECK(v.kind == VerdictKind::flow);
  CHECK(v.flow.size() == 5);
}

TEST_CASE("reachable threshold from a poor start") {
  auto inst = parallel_instance(0.0, 1e-3);
  const double opt = static_pnorm_opt(inst).optimum;
  REQUIRE(opt < 0.0);
  PNormInstance target(2, {-1.0, 1.0}, 2, opt / 2.0, 1e-3);
  target.add_edge(0, 1, {1.0, 0.1, 0.1});
  for (int i = 0; i < 3; ++i) target.add_edge(0, 1, {0.0, 0.1, 0.1});
  RefineOptions o;
  o.assert_invariants = true;
  IncrementalPNorm engine(target, o);
  auto v = engine.initialize(std::vector<double>{1.0, 0.0, 0.0, 0.0});
  REQUIRE(v.kind == VerdictKind::flow);
  CHECK(v.energy <= opt / 2.0 + 1e-3);
  CHECK(v.energy == doctest::Approx(energy(target, v.flow)));
  const auto d = engine.diagnostics();
  CHECK(d.steps >= 1);
  CHECK(d.steps <= d.step_budget);
  CHECK(d.contraction_violations == 0);
  CHECK(d.worst_contraction <= d.contraction_bound);
  CHECK(d.worst_gradient_error <= 1e-9);
  CHECK(d.worst_r_norm <= 1.0);
  CHECK(d.worst_w_norm <= 1.0);
}

TEST_CASE("unreachable threshold is certified at every prefix") {
  PNormGenOptions g;
  g.vertex_count = 6;
  g.seed = 12;
  auto stream = random_pnorm_stream(g);
  // Lower F well below the final optimum.
  auto inst = stream.pnorm_instance();
  std::vector<PNormEvent> events;
  for (const auto& e : stream.events) {
    events.push_back({e.tail, e.head, e.weights()});
    inst.add_edge(e.tail, e.head, e.weights());
  }
  const double final_opt = static_pnorm_opt(inst).optimum;
  stream.threshold = final_opt - 1.0 - std::abs(final_opt);
  RefineOptions o;
  o.m_hat = stream.m_hat;
  auto verdicts = incremental_pnorm(stream.pnorm_instance(), events, o);
  REQUIRE(verdicts.size() == events.size() + 1);
  for (const auto& v : verdicts) CHECK(v.kind == VerdictKind::certified_above);
}

TEST_CASE("verdicts agree with the static oracle") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    PNormGenOptions g;
    g.vertex_count = 5 + seed % 4;
    g.p = 2 + static_cast<int>(seed % 3);
    g.seed = seed;
    auto stream = seed % 2 ? planted_threshold_stream(g) : random_pnorm_stream(g);
    RefineOptions o;
    o.assert_invariants = true;
    o.m_hat = stream.m_hat;
    IncrementalPNorm engine(stream.pnorm_instance(), o);
    auto shadow = stream.pnorm_instance();
    const double F = stream.threshold;
    const double eps = stream.eps;
    auto check = [&](const Verdict& v) {
      if (v.kind == VerdictKind::certified_above) {
        if (shadow.demand_routable()) {
          CHECK(static_pnorm_opt(shadow).optimum > F - 1e-7 * (1.0 + std::abs(F)));
        }
      } else {
        auto d = net_demand(shadow.graph(), v.flow);
        for (std::size_t x = 0; x < d.size(); ++x) {
          CHECK(d[x] == doctest::Approx(shadow.demand()[x]).epsilon(1e-9));
        }
        CHECK(energy(shadow, v.flow) <= F + eps + 1e-7 * (std::abs(F) + eps));
      }
    };
    check(engine.initialize());
    for (const auto& e : stream.events) {
      shadow.add_edge(e.tail, e.head, e.weights());
      check(engine.insert_edge(e.tail, e.head, e.weights()));
    }
    const auto d = engine.diagnostics();
    CHECK(d.steps <= d.step_budget);
    CHECK(d.mwu.potential_violations == 0);
  }
}

TEST_CASE("engine argument errors") {
  auto inst = parallel_instance(0.0, 1e-3);
  RefineOptions o;
  o.m_hat = 4;
  IncrementalPNorm engine(inst, o);
  CHECK_THROWS_AS(engine.insert_edge(0, 1, {}), InputError);
  engine.initialize(std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK_THROWS_AS(engine.initialize(), InputError);
  CHECK_THROWS_AS(engine.insert_edge(0, 1, {}), InputError);

  IncrementalPNorm other(inst, {});
  CHECK_THROWS_AS(other.initialize(std::vector<double>{1.0, 1.0, 0.0, 0.0}), InputError);

  o.m_hat = 2;
  CHECK_THROWS_AS(IncrementalPNorm(inst, o), InputError);
}
