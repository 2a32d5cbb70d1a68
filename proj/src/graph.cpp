#include "incflow/graph.hpp"

#include <algorithm>
#include <string>

namespace incflow {

DisjointSets::DisjointSets(std::size_t n) { grow(n); }

void DisjointSets::grow(std::size_t n) {
  for (std::size_t i = parent_.size(); i < n; ++i) {
    parent_.push_back(i);
    rank_size_.push_back(1);
  }
}

std::size_t DisjointSets::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool DisjointSets::unite(std::size_t x, std::size_t y) {
  x = find(x);
  y = find(y);
  if (x == y) return false;
  if (rank_size_[x] < rank_size_[y]) std::swap(x, y);
  parent_[y] = x;
  rank_size_[x] += rank_size_[y];
  return true;
}

IncrementalGraph::IncrementalGraph(std::size_t vertex_count)
    : incident_(vertex_count), components_(vertex_count) {}

EdgeId IncrementalGraph::add_edge(VertexId u, VertexId v) {
  const auto n = vertex_count();
  if (u >= n || v >= n) {
    throw InputError("add_edge: vertex out of range (" + std::to_string(u) +
                     ", " + std::to_string(v) + ") with n = " +
                     std::to_string(n));
  }
  if (u == v) {
    throw InputError("add_edge: self-loop at vertex " + std::to_string(u));
  }
  const auto id = static_cast<EdgeId>(tails_.size());
  tails_.push_back(u);
  heads_.push_back(v);
  incident_[u].push_back(id);
  incident_[v].push_back(id);
  components_.unite(u, v);
  return id;
}

bool IncrementalGraph::connected(VertexId u, VertexId v) const {
  return components_.find(u) == components_.find(v);
}

double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double linf_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::abs(v));
  return s;
}

bool sums_to_zero(std::span<const double> demand) {
  const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
  return std::abs(total) <= 1e-9 * l1_norm(demand);
}

bool is_circulation(const IncrementalGraph& graph, std::span<const double> c) {
  const auto d = net_demand(graph, c);
  return linf_norm(d) <= 1e-8 * (1.0 + linf_norm(c));
}

DemandTracker::DemandTracker(std::size_t vertex_count,
                             std::vector<double> demand)
    : demand_(std::move(demand)), sets_(vertex_count) {
  if (demand_.size() != vertex_count) {
    throw InputError("demand vector has " + std::to_string(demand_.size()) +
                     " entries, expected " + std::to_string(vertex_count));
  }
  if (!sums_to_zero(demand_)) {
    throw InputError("demand entries do not sum to zero");
  }
  scale_ = l1_norm(demand_);
  component_sum_ = demand_;
  for (double s : component_sum_) {
    if (!balanced(s)) ++unbalanced_;
  }
}

bool DemandTracker::balanced(double sum) const {
  return std::abs(sum) <= 1e-9 * scale_;
}

void DemandTracker::on_edge(VertexId u, VertexId v) {
  const auto ru = sets_.find(u);
  const auto rv = sets_.find(v);
  if (ru == rv) return;
  const double su = component_sum_[ru];
  const double sv = component_sum_[rv];
  if (!balanced(su)) --unbalanced_;
  if (!balanced(sv)) --unbalanced_;
  sets_.unite(ru, rv);
  const auto root = sets_.find(ru);
  component_sum_[root] = su + sv;
  if (!balanced(su + sv)) ++unbalanced_;
}

bool demand_routable(const IncrementalGraph& graph,
                     std::span<const double> demand) {
  const auto n = graph.vertex_count();
  DisjointSets sets(n);
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    sets.unite(graph.tails()[e], graph.heads()[e]);
  }
  std::vector<double> sums(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) sums[sets.find(v)] += demand[v];
  const double scale = l1_norm(demand);
  return std::all_of(sums.begin(), sums.end(), [&](double s) {
    return std::abs(s) <= 1e-9 * scale;
  });
}

double power_sum(std::span<const double> scale, std::span<const double> x,
                 double p) {
  double peak = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    peak = std::max(peak, std::abs(scale[e] * x[e]));
  }
  if (peak == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    s += std::pow(std::abs(scale[e] * x[e]) / peak, p);
  }
  return s * std::pow(peak, p);
}

double weighted_pnorm(std::span<const double> scale, std::span<const double> x,
                      double p) {
  double peak = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    peak = std::max(peak, std::abs(scale[e] * x[e]));
  }
  if (peak == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    s += std::pow(std::abs(scale[e] * x[e]) / peak, p);
  }
  return peak * std::pow(s, 1.0 / p);
}

double weighted_l2(std::span<const double> scale, std::span<const double> x) {
  return weighted_pnorm(scale, x, 2.0);
}

namespace {

void check_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("non-finite flow entry");
  }
}

}  // namespace

double evaluate(const ObjectiveTerms& terms, std::span<const double> x) {
  if (x.size() != terms.size()) {
    throw InputError("objective: vector has " + std::to_string(x.size()) +
                     " entries, expected " + std::to_string(terms.size()));
  }
  check_finite(x);
  double linear = 0.0;
  double quadratic = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    linear += terms.gradient[e] * x[e];
    const double rx = terms.resistance[e] * x[e];
    quadratic += rx * rx;
  }
  return linear + quadratic + power_sum(terms.weight, x, terms.p);
}

std::vector<double> objective_gradient(const ObjectiveTerms& terms,
                                       std::span<const double> x) {
  const double p = terms.p;
  std::vector<double> grad(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double r = terms.resistance[e];
    const double w = terms.weight[e];
    const double ax = std::abs(x[e]);
    // p w^p |x|^{p-2} x, written as p w (w|x|)^{p-1} sign(x).
    const double power_term =
        ax == 0.0 ? 0.0
                  : p * w * std::pow(w * ax, p - 1.0) * (x[e] > 0 ? 1.0 : -1.0);
    grad[e] = terms.gradient[e] + 2.0 * r * r * x[e] + power_term;
  }
  return grad;
}

PNormInstance::PNormInstance(std::size_t vertex_count,
                             std::vector<double> demand, int p,
                             double threshold, double error)
    : graph_(vertex_count),
      tracker_(vertex_count, std::move(demand)),
      threshold_(threshold),
      error_(error) {
  if (p < 2) throw InputError("p must be at least 2");
  if (!(error > 0.0)) throw InputError("eps must be positive");
  if (!std::isfinite(threshold)) throw InputError("F must be finite");
  terms_.p = p;
}

EdgeId PNormInstance::add_edge(VertexId u, VertexId v,
                               const EdgeWeights& weights) {
  if (!(weights.resistance > 0.0) || !(weights.weight > 0.0)) {
    throw InputError("edge resistance and weight must be positive");
  }
  if (!std::isfinite(weights.gradient)) {
    throw InputError("edge gradient must be finite");
  }
  const auto id = graph_.add_edge(u, v);
  terms_.push_back(weights.gradient, weights.resistance, weights.weight);
  tracker_.on_edge(u, v);
  return id;
}

double energy(const PNormInstance& instance, std::span<const double> flow) {
  return evaluate(instance.terms(), flow);
}

}  // namespace incflow
