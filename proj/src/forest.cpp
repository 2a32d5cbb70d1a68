#include "incflow/forest.hpp"

#include <algorithm>
#include <numeric>

namespace incflow {

std::vector<bool> minimum_spanning_forest(const IncrementalGraph& graph,
                                          std::span<const double> key) {
  const auto m = graph.edge_count();
  std::vector<EdgeId> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](EdgeId a, EdgeId b) { return key[a] < key[b]; });
  std::vector<bool> in_tree(m, false);
  DisjointSets sets(graph.vertex_count());
  for (EdgeId e : order) {
    if (sets.unite(graph.tails()[e], graph.heads()[e])) in_tree[e] = true;
  }
  return in_tree;
}

void build_structure(const IncrementalGraph& graph, SpanningTree& tree) {
  const auto n = graph.vertex_count();
  tree.parent.assign(n, 0);
  tree.parent_edge.assign(n, -1);
  tree.depth.assign(n, 0);
  tree.bfs_order.clear();
  tree.bfs_order.reserve(n);
  std::vector<bool> seen(n, false);
  for (VertexId root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    tree.parent[root] = root;
    auto head = tree.bfs_order.size();
    tree.bfs_order.push_back(root);
    for (; head < tree.bfs_order.size(); ++head) {
      const VertexId x = tree.bfs_order[head];
      for (EdgeId e : graph.incident(x)) {
        if (!tree.in_tree[e]) continue;
        const VertexId y = graph.other_end(e, x);
        if (seen[y]) continue;
        seen[y] = true;
        tree.parent[y] = x;
        tree.parent_edge[y] = e;
        tree.depth[y] = tree.depth[x] + 1;
        tree.bfs_order.push_back(y);
      }
    }
  }
}

VertexId lowest_common_ancestor(const SpanningTree& tree, VertexId a,
                                VertexId b) {
  while (tree.depth[a] > tree.depth[b]) a = tree.parent[a];
  while (tree.depth[b] > tree.depth[a]) b = tree.parent[b];
  while (a != b) {
    a = tree.parent[a];
    b = tree.parent[b];
  }
  return a;
}

Circulation fundamental_cycle(const IncrementalGraph& graph,
                              const SpanningTree& tree, EdgeId e, double sign) {
  const VertexId u = graph.tails()[e];
  const VertexId v = graph.heads()[e];
  const VertexId top = lowest_common_ancestor(tree, u, v);
  Circulation c;
  c.append(e, sign);
  // Up from v: traverse x -> parent(x).
  for (VertexId x = v; x != top; x = tree.parent[x]) {
    const auto pe = static_cast<EdgeId>(tree.parent_edge[x]);
    c.append(pe, graph.tails()[pe] == x ? sign : -sign);
  }
  // Down to u: traverse parent(x) -> x.
  std::vector<EdgeTerm> down;
  for (VertexId x = u; x != top; x = tree.parent[x]) {
    const auto pe = static_cast<EdgeId>(tree.parent_edge[x]);
    down.push_back({pe, graph.heads()[pe] == x ? sign : -sign});
  }
  for (auto it = down.rbegin(); it != down.rend(); ++it) {
    c.append(it->edge, it->value);
  }
  return c;
}

std::vector<double> tree_routing(const IncrementalGraph& graph,
                                 const SpanningTree& tree,
                                 std::span<const double> demand) {
  std::vector<double> flow(graph.edge_count(), 0.0);
  std::vector<double> subtree(demand.begin(), demand.end());
  for (auto it = tree.bfs_order.rbegin(); it != tree.bfs_order.rend(); ++it) {
    const VertexId y = *it;
    const auto pe = tree.parent_edge[y];
    if (pe < 0) continue;
    const auto e = static_cast<EdgeId>(pe);
    // The subtree of y must receive its total demand through e.
    flow[e] = graph.heads()[e] == y ? subtree[y] : -subtree[y];
    subtree[tree.parent[y]] += subtree[y];
  }
  return flow;
}

}  // namespace incflow
