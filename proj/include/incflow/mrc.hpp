#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "incflow/circulation.hpp"
#include "incflow/forest.hpp"
#include "incflow/graph.hpp"

namespace incflow {

// Edge gradients g and strictly positive lengths l on an incremental graph.
// The ratio of a circulation c is <g, c> / ||L c||_1.
struct MrcInstance {
  IncrementalGraph graph;
  std::vector<double> gradient;
  std::vector<double> length;

  explicit MrcInstance(std::size_t vertex_count = 0) : graph(vertex_count) {}

  EdgeId add_edge(VertexId u, VertexId v, double g, double len);
  std::size_t edge_count() const { return graph.edge_count(); }
  std::size_t vertex_count() const { return graph.vertex_count(); }
};

double cycle_ratio(const MrcInstance& instance, const Circulation& c);

// A cycle kept as one off-tree edge closed by the tree path between its
// endpoints: sign * (chi_e + path(head(e) -> tail(e))).
struct TreePathCycle {
  std::size_t tree;
  EdgeId off_tree_edge;
  double sign;
};

struct CycleSolution {
  Circulation cycle;
  double ratio;
  std::optional<TreePathCycle> tree_form;
};

// Enumerates every simple cycle in both orientations. Only for tiny graphs:
// throws InputError beyond 16 vertices and 24 edges.
std::optional<CycleSolution> brute_force_min_ratio_cycle(
    const MrcInstance& instance);

// Minimum cost-to-length ratio cycle by parametric search over mu with
// negative-cycle detection on the bidirected graph, where edge e gives arcs
// tail->head of weight g_e - mu l_e and head->tail of weight -g_e - mu l_e.
// The returned simple cycle is within additive tol of the minimum ratio.
std::optional<CycleSolution> exact_min_ratio_cycle(const MrcInstance& instance,
                                                   double tol);

// A simple cycle with negative weight under the arc weights above, or nullopt.
// When `potential` is non-empty it seeds the labels (must be feasible for a
// previous, pointwise smaller weighting) and receives feasible labels back
// when no cycle exists.
std::optional<Circulation> find_negative_cycle(const MrcInstance& instance,
                                               double mu,
                                               std::vector<double>* potential =
                                                   nullptr);

enum class MrcBackend { exact, trees };

struct MrcOptions {
  MrcBackend backend = MrcBackend::exact;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  // 0 selects 4 * ceil(log2 n).
  std::size_t tree_count = 0;
  bool record_log = false;
  // Cross-check every tree-backend "no good cycle" against the exact backend
  // and throw ConfigurationError when kappa is violated.
  bool validate_kappa = false;
};

struct InsertEdge {
  VertexId tail;
  VertexId head;
  double gradient;
  double length;
};

struct IncreaseLength {
  EdgeId edge;
  double length;
};

using MrcUpdate = std::variant<InsertEdge, IncreaseLength>;

// Replayable record of the updates an oracle saw. Batch 0 holds the initial
// edges; each later batch is one edge insertion or, for a length increase, a
// removal of the edge followed by its reinsertion with the new length.
struct LoggedUpdate {
  enum class Kind { insert, remove };
  Kind kind;
  EdgeId edge;
  VertexId tail;
  VertexId head;
  double gradient;
  double length;
};

struct UpdateLog {
  std::size_t vertex_count = 0;
  std::vector<std::vector<LoggedUpdate>> batches;

  std::size_t stage_count() const { return batches.size(); }
  std::size_t edge_id_bound() const;
};

// Per-stage hidden circulations and widths, both dense over edge ids
// [0, log.edge_id_bound()).
struct HiddenWitness {
  std::vector<std::vector<double>> circulation;
  std::vector<std::vector<double>> width;
};

struct WitnessReport {
  bool ok = true;
  // 1: not a circulation, 2: width below |l c|, 3: width more than doubled on
  // an untouched edge, 4: total width decreased.
  int failed_item = 0;
  std::size_t stage = 0;

  explicit operator bool() const { return ok; }
};

// Hidden stable-flow chasing conditions at every stage of the log.
WitnessReport hsfc_witness_check(const UpdateLog& log,
                                 const HiddenWitness& witness);

// c^(t) = c_star once its support is present, else 0; w_e = |l_e c_star_e| on
// supp(c_star), else 0.
HiddenWitness canonical_witness(const UpdateLog& log,
                                std::span<const double> c_star);

struct MrcStats {
  std::size_t queries = 0;
  std::size_t solves = 0;
  std::size_t updates = 0;
  std::size_t rebuilds = 0;
};

// Approximate monotonic min-ratio cycle oracle. Lengths only increase. After
// any sequence of updates, query() returns a cycle of ratio <= -alpha / kappa
// whenever some circulation on the current graph has ratio <= -alpha.
class MonotoneMrc {
 public:
  MonotoneMrc(MrcInstance instance, double alpha, const MrcOptions& options);

  EdgeId update(const MrcUpdate& update);
  EdgeId insert_edge(VertexId u, VertexId v, double gradient, double length);
  void increase_length(EdgeId e, double length);

  std::optional<CycleSolution> query();

  // Best fundamental cycle over the tree collection (trees backend only).
  std::optional<CycleSolution> best_fundamental_cycle();
  Circulation expand(const TreePathCycle& form) const;

  const MrcInstance& instance() const { return instance_; }
  double alpha() const { return alpha_; }
  double kappa() const { return options_.kappa; }
  MrcBackend backend() const { return options_.backend; }
  const MrcStats& stats() const { return stats_; }
  const UpdateLog& log() const { return log_; }
  std::span<const SpanningTree> trees() const { return trees_; }

 private:
  void rebuild_trees();
  void refresh_tree(SpanningTree& tree) const;
  std::optional<CycleSolution> query_exact();
  double total_length() const;

  MrcInstance instance_;
  double alpha_;
  MrcOptions options_;
  MrcStats stats_;
  UpdateLog log_;

  bool dirty_ = true;
  std::optional<CycleSolution> cached_;
  std::vector<double> potential_;
  bool potential_valid_ = false;

  std::vector<SpanningTree> trees_;
  bool trees_stale_ = true;
  double checkpoint_length_ = 0.0;
};

}  // namespace incflow
