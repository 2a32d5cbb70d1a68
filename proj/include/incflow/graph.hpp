#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "incflow/common.hpp"

namespace incflow {

struct Edge {
  VertexId tail;
  VertexId head;
};

// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0);

  void grow(std::size_t n);
  std::size_t find(std::size_t x);
  // Returns false when x and y were already joined.
  bool unite(std::size_t x, std::size_t y);
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_size_;
};

// Undirected multigraph that only grows. Each edge carries the orientation it
// was inserted with; flow +1 on edge (u, v) leaves u and enters v.
class IncrementalGraph {
 public:
  explicit IncrementalGraph(std::size_t vertex_count = 0);

  EdgeId add_edge(VertexId u, VertexId v);

  std::size_t vertex_count() const { return incident_.size(); }
  std::size_t edge_count() const { return tails_.size(); }
  Edge edge(EdgeId e) const { return {tails_[e], heads_[e]}; }
  std::span<const VertexId> tails() const { return tails_; }
  std::span<const VertexId> heads() const { return heads_; }
  std::span<const EdgeId> incident(VertexId v) const { return incident_[v]; }
  VertexId other_end(EdgeId e, VertexId v) const {
    return tails_[e] == v ? heads_[e] : tails_[e];
  }

  bool connected(VertexId u, VertexId v) const;

 private:
  std::vector<VertexId> tails_;
  std::vector<VertexId> heads_;
  std::vector<std::vector<EdgeId>> incident_;
  mutable DisjointSets components_;
};

// B^T f: flow on edge (u, v) contributes -f at u and +f at v. Templated so the
// exact-rational tests can run the same code path.
template <typename Scalar>
std::vector<Scalar> net_demand(const IncrementalGraph& graph,
                               std::span<const Scalar> flow) {
  if (flow.size() != graph.edge_count()) {
    throw InputError("net_demand: flow has " + std::to_string(flow.size()) +
                     " entries, graph has " +
                     std::to_string(graph.edge_count()) + " edges");
  }
  std::vector<Scalar> demand(graph.vertex_count(), Scalar(0));
  for (std::size_t e = 0; e < flow.size(); ++e) {
    demand[graph.tails()[e]] -= flow[e];
    demand[graph.heads()[e]] += flow[e];
  }
  return demand;
}

inline std::vector<double> net_demand(const IncrementalGraph& graph,
                                      std::span<const double> flow) {
  return net_demand<double>(graph, flow);
}

double l1_norm(std::span<const double> x);
double linf_norm(std::span<const double> x);

// |sum d| <= 1e-9 * ||d||_1.
bool sums_to_zero(std::span<const double> demand);

// ||B^T c||_inf <= 1e-8 * (1 + ||c||_inf).
bool is_circulation(const IncrementalGraph& graph, std::span<const double> c);

// Tracks, per connected component, the sum of the demand entries it holds.
// The demand is routable exactly when every component sums to zero.
class DemandTracker {
 public:
  DemandTracker() = default;
  DemandTracker(std::size_t vertex_count, std::vector<double> demand);

  void on_edge(VertexId u, VertexId v);
  bool routable() const { return unbalanced_ == 0; }
  std::span<const double> demand() const { return demand_; }

 private:
  bool balanced(double sum) const;

  std::vector<double> demand_;
  double scale_ = 0.0;
  DisjointSets sets_;
  std::vector<double> component_sum_;
  std::size_t unbalanced_ = 0;
};

// From-scratch recomputation; used to cross-check DemandTracker.
bool demand_routable(const IncrementalGraph& graph,
                     std::span<const double> demand);

// Per-edge attributes of an objective <g, x> + ||R x||_2^2 + ||W x||_p^p,
// stored column-wise.
struct ObjectiveTerms {
  std::vector<double> gradient;
  std::vector<double> resistance;
  std::vector<double> weight;
  int p = 2;

  std::size_t size() const { return gradient.size(); }
  void push_back(double g, double r, double w) {
    gradient.push_back(g);
    resistance.push_back(r);
    weight.push_back(w);
  }
};

// Evaluates the objective. The p-th power sum is normalized by its largest
// term so it only overflows when the true value does.
double evaluate(const ObjectiveTerms& terms, std::span<const double> x);

// Gradient of the objective at x.
std::vector<double> objective_gradient(const ObjectiveTerms& terms,
                                       std::span<const double> x);

// sum_e |scale_e * x_e|^p computed as M^p * sum (|scale_e x_e| / M)^p.
double power_sum(std::span<const double> scale, std::span<const double> x,
                 double p);
// ||diag(scale) x||_p, overflow-safe.
double weighted_pnorm(std::span<const double> scale, std::span<const double> x,
                      double p);
double weighted_l2(std::span<const double> scale, std::span<const double> x);

struct EdgeWeights {
  double gradient = 0.0;
  double resistance = 1.0;
  double weight = 1.0;
};

// A smoothed p-norm flow instance: graph, per-edge (g, r, w), demand d,
// exponent p, threshold F and additive error eps.
class PNormInstance {
 public:
  PNormInstance(std::size_t vertex_count, std::vector<double> demand, int p,
                double threshold, double error);

  EdgeId add_edge(VertexId u, VertexId v, const EdgeWeights& weights);

  const IncrementalGraph& graph() const { return graph_; }
  const ObjectiveTerms& terms() const { return terms_; }
  std::span<const double> demand() const { return tracker_.demand(); }
  bool demand_routable() const { return tracker_.routable(); }
  int p() const { return terms_.p; }
  double threshold() const { return threshold_; }
  double error() const { return error_; }

 private:
  IncrementalGraph graph_;
  ObjectiveTerms terms_;
  DemandTracker tracker_;
  double threshold_;
  double error_;
};

// <g, f> + ||R f||_2^2 + ||W f||_p^p on the instance's own attributes.
double energy(const PNormInstance& instance, std::span<const double> flow);

}  // namespace incflow
