#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "incflow/drivers.hpp"
#include "incflow/gen.hpp"
#include "incflow/stream.hpp"
#include "incflow/verify.hpp"

using namespace incflow;

namespace {

DriverOptions with_bound(std::size_t m_hat) {
  DriverOptions o;
  o.m_hat = m_hat;
  o.assert_invariants = true;
  return o;
}

void check_feasible(const IncrementalGraph& g, std::span<const std::int64_t> cap,
                    const MaxflowReport& r, VertexId s, VertexId t) {
  REQUIRE(r.flow.size() == g.edge_count());
  std::vector<std::int64_t> excess(g.vertex_count(), 0);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    CHECK(std::abs(r.flow[e]) <= cap[e]);
    excess[g.tails()[e]] -= r.flow[e];
    excess[g.heads()[e]] += r.flow[e];
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const std::int64_t want = v == t ? r.value : v == s ? -r.value : 0;
    CHECK(excess[v] == want);
  }
}

}  // namespace

TEST_CASE("maxflow: parallel edge doubles the value") {
  const double eps = 0.5;
  IncrementalMaxflow mf(2, 0, 1, eps, with_bound(2));
  mf.add_initial_edge(0, 1, 5);
  auto r = mf.start();
  CHECK(r.value == 5);
  CHECK(mf.phases() == 1);
  r = mf.insert_edge(0, 1, 5);
  CHECK(static_cast<double>(r.value) >= (1.0 - eps) * 10.0);
  CHECK(mf.phases() <= mf.phase_bound());
}

TEST_CASE("maxflow: edges away from the cut change nothing") {
  IncrementalMaxflow mf(5, 0, 1, 0.25, with_bound(6));
  mf.add_initial_edge(0, 1, 3);
  mf.add_initial_edge(2, 3, 1);
  auto r = mf.start();
  CHECK(r.value == 3);
  for (auto [u, v] : {std::pair{2, 3}, {3, 4}, {4, 2}, {2, 4}}) {
    r = mf.insert_edge(u, v, 4);
    CHECK(r.value == 3);
    CHECK_FALSE(r.restarted);
  }
  CHECK(mf.phases() == 1);
}

TEST_CASE("maxflow: first s-t connection") {
  IncrementalMaxflow mf(3, 0, 2, 0.5, with_bound(3));
  mf.add_initial_edge(0, 1, 4);
  CHECK(mf.start().value == 0);
  auto r = mf.insert_edge(1, 2, 3);
  CHECK(r.value == 3);
  CHECK(r.flow == std::vector<std::int64_t>{3, 3});
}

TEST_CASE("maxflow: argument errors") {
  CHECK_THROWS_AS(IncrementalMaxflow(3, 1, 1, 0.5, with_bound(3)), InputError);
  CHECK_THROWS_AS(IncrementalMaxflow(3, 0, 1, 0.75, with_bound(3)), InputError);
  CHECK_THROWS_AS(IncrementalMaxflow(3, 0, 1, 0.5, with_bound(0)), InputError);
  IncrementalMaxflow mf(3, 0, 1, 0.5, with_bound(1));
  CHECK_THROWS_AS(mf.add_initial_edge(0, 1, 0), InputError);
  CHECK_THROWS_AS(mf.insert_edge(0, 1, 1), InputError);
  mf.start();
  CHECK_THROWS_AS(mf.start(), InputError);
  mf.insert_edge(0, 2, 1);
  CHECK_THROWS_AS(mf.insert_edge(0, 2, 1), InputError);
}

TEST_CASE("maxflow: random streams stay within (1 - eps) of the optimum") {
  for (double eps : {0.5, 0.25, 0.1}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      MaxflowGenOptions g;
      g.vertex_count = 6 + seed;
      g.events = 16;
      g.eps = eps;
      g.seed = seed;
      auto stream = seed % 2 ? phase_stress_stream(g) : random_maxflow_stream(g);
      IncrementalMaxflow mf(stream.vertex_count, stream.s, stream.t, eps,
                            with_bound(stream.m_hat));
      IncrementalGraph shadow(stream.vertex_count);
      std::vector<std::int64_t> cap;
      for (const auto& e : stream.initial) {
        mf.add_initial_edge(e.tail, e.head, *e.capacity);
        shadow.add_edge(e.tail, e.head);
        cap.push_back(*e.capacity);
      }
      auto check = [&](const MaxflowReport& r) {
        const auto exact = exact_maxflow(shadow, cap, stream.s, stream.t).value;
        CHECK(static_cast<double>(r.value) >= (1.0 - eps) * static_cast<double>(exact));
        check_feasible(shadow, cap, r, stream.s, stream.t);
      };
      check(mf.start());
      for (const auto& e : stream.events) {
        shadow.add_edge(e.tail, e.head);
        cap.push_back(*e.capacity);
        check(mf.insert_edge(e.tail, e.head, *e.capacity));
      }
      CHECK(mf.phases() <= mf.phase_bound());
      const auto d = mf.diagnostics();
      CHECK(d.contraction_violations == 0);
      CHECK(d.mwu.potential_violations == 0);
    }
  }
}

TEST_CASE("effres examples") {
  IncrementalEffRes above(2, 0, 1, 0.6, 0.1, with_bound(2));
  above.add_initial_edge(0, 1, 1.0);
  CHECK(above.start().verdict == EffResVerdict::above);
  auto r = above.insert_edge(0, 1, 1.0);
  CHECK(r.verdict == EffResVerdict::below);
  CHECK(r.estimate <= 0.6 * 1.1);
  CHECK(r.estimate >= 0.5 * (1.0 - 1e-9));
  CHECK(r.flow.size() == 2);
  CHECK(r.flow[0] + r.flow[1] == doctest::Approx(1.0));

  IncrementalEffRes low(2, 0, 1, 2.0, 0.1, with_bound(1));
  low.add_initial_edge(0, 1, 1.0);
  r = low.start();
  CHECK(r.verdict == EffResVerdict::below);
  CHECK(r.estimate == doctest::Approx(1.0));

  // s and t apart at first.
  IncrementalEffRes late(3, 0, 2, 1.5, 0.1, with_bound(2));
  late.add_initial_edge(0, 1, 1.0);
  CHECK(late.start().verdict == EffResVerdict::above);
  CHECK(late.insert_edge(1, 2, 0.25).verdict == EffResVerdict::below);

  CHECK_THROWS_AS(IncrementalEffRes(2, 0, 1, 0.0, 0.1, with_bound(1)), InputError);
  CHECK_THROWS_AS(IncrementalEffRes(2, 0, 1, -1.0, 0.1, with_bound(1)), InputError);
  CHECK_THROWS_AS(IncrementalEffRes(2, 0, 0, 1.0, 0.1, with_bound(1)), InputError);
  IncrementalEffRes bad(2, 0, 1, 1.0, 0.1, with_bound(1));
  CHECK_THROWS_AS(bad.add_initial_edge(0, 1, 0.0), InputError);
}

TEST_CASE("effres: random streams flip once, on time") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EffResGenOptions g;
    g.seed = seed;
    g.vertex_count = 5 + seed % 4;
    auto stream = random_effres_stream(g);
    const double eps = stream.eps;
    const double theta = stream.theta;
    IncrementalEffRes er(stream.vertex_count, stream.s, stream.t, theta, eps,
                         with_bound(stream.m_hat));
    IncrementalGraph shadow(stream.vertex_count);
    std::vector<double> res;
    for (const auto& e : stream.initial) {
      er.add_initial_edge(e.tail, e.head, *e.resistance);
      shadow.add_edge(e.tail, e.head);
      res.push_back(*e.resistance);
    }
    bool below = false;
    auto check = [&](const EffResReport& r) {
      const bool linked = shadow.connected(stream.s, stream.t);
      const double reff =
          linked ? effective_resistance(shadow, res, stream.s, stream.t) : INFINITY;
      if (below) CHECK(r.verdict == EffResVerdict::below);
      if (reff < theta * (1.0 - eps)) CHECK(r.verdict == EffResVerdict::below);
      if (r.verdict == EffResVerdict::below) {
        CHECK(reff <= theta * (1.0 + eps));
        CHECK(r.estimate >= reff * (1.0 - 1e-9));
        CHECK(r.estimate <= theta * (1.0 + eps));
        below = true;
      } else {
        CHECK(reff >= theta / (1.0 + 1e-9));
      }
    };
    check(er.start());
    for (const auto& e : stream.events) {
      shadow.add_edge(e.tail, e.head);
      res.push_back(*e.resistance);
      check(er.insert_edge(e.tail, e.head, *e.resistance));
    }
  }
}
