#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/rational.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "incflow/graph.hpp"

using namespace incflow;

TEST_CASE("edge ids are dense and parallel edges coexist") {
  IncrementalGraph g(3);
  CHECK(g.add_edge(0, 1) == 0);
  CHECK(g.add_edge(0, 1) == 1);
  CHECK(g.edge_count() == 2);
  CHECK(g.incident(0).size() == 2);
}

TEST_CASE("self-loops and out-of-range vertices are rejected") {
  IncrementalGraph g(3);
  CHECK_THROWS_AS(g.add_edge(1, 1), InputError);
  CHECK_THROWS_AS(g.add_edge(0, 3), InputError);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("net demand follows the tail -1 / head +1 convention") {
  IncrementalGraph g(3);
  g.add_edge(0, 1);
  std::vector<double> f{1.0};
  auto d = net_demand(g, std::span<const double>(f));
  CHECK(d == std::vector<double>{-1.0, 1.0, 0.0});

  std::vector<double> zero{0.0};
  CHECK(net_demand(g, std::span<const double>(zero)) == std::vector<double>(3, 0.0));

  IncrementalGraph tri(3);
  tri.add_edge(0, 1);
  tri.add_edge(1, 2);
  tri.add_edge(2, 0);
  std::vector<double> c{1.0, 1.0, 1.0};
  CHECK(net_demand(tri, std::span<const double>(c)) == std::vector<double>(3, 0.0));
  CHECK(is_circulation(tri, c));

  std::vector<double> wrong{1.0, 2.0};
  CHECK_THROWS_AS(net_demand(g, std::span<const double>(wrong)), InputError);
}

TEST_CASE("net demand is exactly linear over rationals") {
  using Q = boost::rational<long long>;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 8;
    IncrementalGraph g(n);
    for (int i = 0; i < 12; ++i) {
      VertexId u = rng() % n, v = rng() % n;
      if (u != v) g.add_edge(u, v);
    }
    std::vector<Q> f(g.edge_count()), scaled(g.edge_count());
    const Q t(static_cast<long long>(rng() % 19) - 9, 1 + rng() % 7);
    for (std::size_t e = 0; e < f.size(); ++e) {
      f[e] = Q(static_cast<long long>(rng() % 41) - 20, 1 + rng() % 11);
      scaled[e] = t * f[e];
    }
    auto d = net_demand<Q>(g, f);
    auto ds = net_demand<Q>(g, scaled);
    for (std::size_t v = 0; v < n; ++v) CHECK(ds[v] == t * d[v]);
  }
}

TEST_CASE("routability examples") {
  std::vector<double> d{-1.0, 1.0};
  PNormInstance inst(2, d, 2, 0.0, 1.0);
  CHECK_FALSE(inst.demand_routable());
  inst.add_edge(0, 1, {});
  CHECK(inst.demand_routable());

  IncrementalGraph g(4);
  std::vector<double> zero(4, 0.0);
  CHECK(demand_routable(g, zero));
}

TEST_CASE("incremental routability matches recomputation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    std::vector<double> d(n, 0.0);
    for (int k = 0; k < 3; ++k) {
      const double x = std::uniform_real_distribution<double>(-2, 2)(rng);
      d[rng() % n] += x;
      d[rng() % n] -= x;
    }
    PNormInstance inst(n, d, 2, 0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
      VertexId u = rng() % n, v = rng() % n;
      if (u == v) continue;
      inst.add_edge(u, v, {});
      REQUIRE(inst.demand_routable() == demand_routable(inst.graph(), inst.demand()));
    }
  }
}

TEST_CASE("energy examples") {
  PNormInstance one(2, {0.0, 0.0}, 2, 0.0, 1.0);
  one.add_edge(0, 1, {1.0, 1.0, 1.0});
  std::vector<double> f{1.0};
  CHECK(energy(one, f) == doctest::Approx(3.0));
  std::vector<double> zero{0.0};
  CHECK(energy(one, zero) == 0.0);

  PNormInstance cube(2, {0.0, 0.0}, 3, 0.0, 1.0);
  cube.add_edge(0, 1, {0.0, 1.0, 2.0});
  CHECK(energy(cube, f) == doctest::Approx(9.0));

  std::vector<double> bad{std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(energy(one, bad), InputError);
}

TEST_CASE("normalized power sums agree with naive summation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    ObjectiveTerms t;
    t.p = 2 + static_cast<int>(rng() % 9);
    std::vector<double> x;
    for (int e = 0; e < 20; ++e) {
      t.push_back(u(rng), 0.1 + std::abs(u(rng)), 0.1 + std::abs(u(rng)));
      x.push_back(u(rng));
    }
    double naive = 0.0;
    for (std::size_t e = 0; e < x.size(); ++e) {
      naive += t.gradient[e] * x[e] + std::pow(t.resistance[e] * x[e], 2) +
               std::pow(std::abs(t.weight[e] * x[e]), t.p);
    }
    CHECK(std::abs(evaluate(t, x) - naive) <= 1e-10 * std::max(1.0, std::abs(naive)));
  }
  // Far beyond double range for naive summation, still finite here.
  std::vector<double> scale{1e200, 1e200};
  std::vector<double> y{1.0, 1.0};
  CHECK(weighted_pnorm(scale, y, 4) == doctest::Approx(1e200 * std::pow(2.0, 0.25)));
}

TEST_CASE("instance rejects bad parameters") {
  CHECK_THROWS_AS(PNormInstance(2, {1.0, 1.0}, 2, 0.0, 1.0), InputError);
  CHECK_THROWS_AS(PNormInstance(2, {0.0, 0.0}, 1, 0.0, 1.0), InputError);
  CHECK_THROWS_AS(PNormInstance(2, {0.0, 0.0}, 2, 0.0, 0.0), InputError);
  PNormInstance ok(2, {0.0, 0.0}, 2, 0.0, 1.0);
  CHECK_THROWS_AS(ok.add_edge(0, 1, {0.0, 0.0, 1.0}), InputError);
}
