#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "incflow/circulation.hpp"
#include "incflow/graph.hpp"

namespace incflow {

// A spanning forest marked on an IncrementalGraph, rooted by BFS from the
// smallest vertex of every component.
struct SpanningTree {
  std::vector<bool> in_tree;
  std::vector<std::int64_t> parent_edge;  // -1 at roots
  std::vector<VertexId> parent;
  std::vector<std::uint32_t> depth;
  std::vector<VertexId> bfs_order;
  // Signed gradient and total length from the component root.
  std::vector<double> root_gradient;
  std::vector<double> root_length;
};

// Kruskal over edges ordered by increasing key (ties keep edge order).
std::vector<bool> minimum_spanning_forest(const IncrementalGraph& graph,
                                          std::span<const double> key);

// Fills parent, parent_edge, depth and bfs_order from in_tree.
void build_structure(const IncrementalGraph& graph, SpanningTree& tree);

VertexId lowest_common_ancestor(const SpanningTree& tree, VertexId a, VertexId b);

// sign * (chi_e + tree path from head(e) back to tail(e)); e must be off-tree.
Circulation fundamental_cycle(const IncrementalGraph& graph,
                              const SpanningTree& tree, EdgeId e, double sign);

// The flow on tree edges only that routes `demand`, which must sum to zero on
// every component.
std::vector<double> tree_routing(const IncrementalGraph& graph,
                                 const SpanningTree& tree,
                                 std::span<const double> demand);

}  // namespace incflow
