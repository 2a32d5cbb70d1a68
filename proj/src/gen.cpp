#include "incflow/gen.hpp"

#include <cmath>
#include <random>

#include "incflow/random.hpp"
#include "incflow/verify.hpp"

namespace incflow {

namespace {

// Streams 0..: one per purpose, all from the user seed.
enum Purpose : std::uint64_t { structure = 1, attributes = 2, threshold = 3 };

std::pair<VertexId, VertexId> random_pair(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(n - 1));
  const VertexId u = pick(rng);
  VertexId v = pick(rng);
  while (v == u) v = pick(rng);
  return {u, v};
}

StreamEdge pnorm_edge(VertexId u, VertexId v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  std::uniform_real_distribution<double> rw(0.5, 2.0);
  StreamEdge e;
  e.tail = u;
  e.head = v;
  e.gradient = g(rng);
  e.resistance = rw(rng);
  e.weight = rw(rng);
  return e;
}

UpdateStream pnorm_skeleton(const PNormGenOptions& o) {
  if (o.vertex_count < 2) throw InputError("gen: need at least 2 vertices");
  std::mt19937_64 shape(derive_seed(o.seed, Purpose::structure));
  std::mt19937_64 attrs(derive_seed(o.seed, Purpose::attributes));
  UpdateStream s;
  s.kind = ProblemKind::pnorm;
  s.vertex_count = o.vertex_count;
  s.p = o.p;
  s.eps = o.eps;
  const auto n = o.vertex_count;
  // Random tree: vertex i attaches to a random earlier vertex.
  for (VertexId i = 1; i < n; ++i) {
    std::uniform_int_distribution<VertexId> parent(0, i - 1);
    s.initial.push_back(pnorm_edge(parent(shape), i, attrs));
  }
  for (std::size_t i = 0; i < o.extra_initial; ++i) {
    auto [u, v] = random_pair(shape, n);
    s.initial.push_back(pnorm_edge(u, v, attrs));
  }
  for (std::size_t i = 0; i < o.events; ++i) {
    auto [u, v] = random_pair(shape, n);
    s.events.push_back(pnorm_edge(u, v, attrs));
  }
  s.m_hat = s.initial.size() + s.events.size();
  s.demand = {{0, -1.0}, {static_cast<VertexId>(n - 1), 1.0}};
  return s;
}

}  // namespace

UpdateStream random_pnorm_stream(const PNormGenOptions& options) {
  auto s = pnorm_skeleton(options);
  const double opt0 = static_pnorm_opt(s.pnorm_instance()).optimum;
  std::mt19937_64 rng(derive_seed(options.seed, Purpose::threshold));
  const double fraction = std::uniform_real_distribution<double>(0.3, 0.9)(rng);
  s.threshold = opt0 - fraction * std::abs(opt0);
  return s;
}

UpdateStream planted_threshold_stream(const PNormGenOptions& options) {
  auto s = pnorm_skeleton(options);
  auto instance = s.pnorm_instance();
  const double opt0 = static_pnorm_opt(instance).optimum;
  for (const auto& e : s.events) instance.add_edge(e.tail, e.head, e.weights());
  const double opt1 = static_pnorm_opt(instance).optimum;
  // Midpoint between the two optima; they may be negative because g is.
  s.threshold = 0.5 * (opt0 + opt1);
  return s;
}

UpdateStream random_maxflow_stream(const MaxflowGenOptions& o) {
  if (o.vertex_count < 2) throw InputError("gen: need at least 2 vertices");
  std::mt19937_64 shape(derive_seed(o.seed, Purpose::structure));
  std::mt19937_64 attrs(derive_seed(o.seed, Purpose::attributes));
  std::uniform_int_distribution<std::int64_t> cap(1, o.max_capacity);
  UpdateStream s;
  s.kind = ProblemKind::maxflow;
  s.vertex_count = o.vertex_count;
  s.eps = o.eps;
  s.s = 0;
  s.t = static_cast<VertexId>(o.vertex_count - 1);
  auto edge = [&] {
    auto [u, v] = random_pair(shape, o.vertex_count);
    StreamEdge e;
    e.tail = u;
    e.head = v;
    e.capacity = cap(attrs);
    return e;
  };
  for (std::size_t i = 0; i < o.initial; ++i) s.initial.push_back(edge());
  for (std::size_t i = 0; i < o.events; ++i) s.events.push_back(edge());
  s.m_hat = s.initial.size() + s.events.size();
  return s;
}

UpdateStream phase_stress_stream(const MaxflowGenOptions& o) {
  if (o.vertex_count < 3) throw InputError("gen: phase-stress needs at least 3 vertices");
  std::mt19937_64 shape(derive_seed(o.seed, Purpose::structure));
  std::mt19937_64 attrs(derive_seed(o.seed, Purpose::attributes));
  std::uniform_int_distribution<std::int64_t> cap(1, o.max_capacity);
  std::uniform_int_distribution<VertexId> middle(1, static_cast<VertexId>(o.vertex_count - 2));
  UpdateStream s;
  s.kind = ProblemKind::maxflow;
  s.vertex_count = o.vertex_count;
  s.eps = o.eps;
  s.s = 0;
  s.t = static_cast<VertexId>(o.vertex_count - 1);
  auto make = [&](VertexId u, VertexId v) {
    StreamEdge e;
    e.tail = u;
    e.head = v;
    e.capacity = cap(attrs);
    return e;
  };
  for (std::size_t i = 0; i < o.initial; ++i) {
    auto [u, v] = random_pair(shape, o.vertex_count);
    s.initial.push_back(make(u, v));
  }
  // Alternate s-x and x-t edges through random middle vertices.
  for (std::size_t i = 0; i < o.events; ++i) {
    const VertexId x = middle(shape);
    s.events.push_back(i % 2 == 0 ? make(s.s, x) : make(x, s.t));
  }
  s.m_hat = s.initial.size() + s.events.size();
  return s;
}

UpdateStream random_effres_stream(const EffResGenOptions& o) {
  if (o.vertex_count < 2) throw InputError("gen: need at least 2 vertices");
  std::mt19937_64 shape(derive_seed(o.seed, Purpose::structure));
  std::mt19937_64 attrs(derive_seed(o.seed, Purpose::attributes));
  std::uniform_real_distribution<double> res(0.5, 2.0);
  UpdateStream s;
  s.kind = ProblemKind::effres;
  s.vertex_count = o.vertex_count;
  s.eps = o.eps;
  s.s = 0;
  s.t = static_cast<VertexId>(o.vertex_count - 1);
  auto edge = [&] {
    auto [u, v] = random_pair(shape, o.vertex_count);
    StreamEdge e;
    e.tail = u;
    e.head = v;
    e.resistance = res(attrs);
    return e;
  };
  for (std::size_t i = 0; i < o.initial; ++i) s.initial.push_back(edge());
  for (std::size_t i = 0; i < o.events; ++i) s.events.push_back(edge());
  s.m_hat = s.initial.size() + s.events.size();

  IncrementalGraph graph(o.vertex_count);
  std::vector<double> r;
  for (const auto& e : s.initial) {
    graph.add_edge(e.tail, e.head);
    r.push_back(*e.resistance);
  }
  const std::size_t midway = o.events / 2;
  for (std::size_t i = 0; i < midway; ++i) {
    graph.add_edge(s.events[i].tail, s.events[i].head);
    r.push_back(*s.events[i].resistance);
  }
  s.theta = graph.connected(s.s, s.t) ? effective_resistance(graph, r, s.s, s.t) : 1.0;
  return s;
}

}  // namespace incflow
