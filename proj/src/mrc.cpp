#include "incflow/mrc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "incflow/random.hpp"

namespace incflow {

EdgeId MrcInstance::add_edge(VertexId u, VertexId v, double g, double len) {
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw InputError("min-ratio cycle: edge length must be positive and finite");
  }
  if (!std::isfinite(g)) throw InputError("min-ratio cycle: non-finite gradient");
  const auto e = graph.add_edge(u, v);
  gradient.push_back(g);
  length.push_back(len);
  return e;
}

double cycle_ratio(const MrcInstance& instance, const Circulation& c) {
  return c.dot(instance.gradient) / c.weighted_l1(instance.length);
}

namespace {

CycleSolution make_solution(const MrcInstance& instance, Circulation c) {
  const double ratio = cycle_ratio(instance, c);
  return CycleSolution{std::move(c), ratio, std::nullopt};
}

void accumulate_root_sums(const MrcInstance& instance, SpanningTree& tree) {
  const auto& graph = instance.graph;
  const auto n = graph.vertex_count();
  tree.root_gradient.assign(n, 0.0);
  tree.root_length.assign(n, 0.0);
  for (VertexId y : tree.bfs_order) {
    const auto pe = tree.parent_edge[y];
    if (pe < 0) continue;
    const auto e = static_cast<EdgeId>(pe);
    const VertexId x = tree.parent[y];
    const double sign = graph.tails()[e] == x ? 1.0 : -1.0;
    tree.root_gradient[y] = tree.root_gradient[x] + sign * instance.gradient[e];
    tree.root_length[y] = tree.root_length[x] + instance.length[e];
  }
}

std::optional<Circulation> any_cycle(const IncrementalGraph& graph) {
  SpanningTree tree;
  tree.in_tree.assign(graph.edge_count(), false);
  DisjointSets sets(graph.vertex_count());
  std::optional<EdgeId> closing;
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    if (sets.unite(graph.tails()[e], graph.heads()[e])) {
      tree.in_tree[e] = true;
    } else if (!closing) {
      closing = e;
    }
  }
  if (!closing) return std::nullopt;
  build_structure(graph, tree);
  return fundamental_cycle(graph, tree, *closing, 1.0);
}

}  // namespace

std::optional<CycleSolution> brute_force_min_ratio_cycle(
    const MrcInstance& instance) {
  const auto& graph = instance.graph;
  const auto n = graph.vertex_count();
  if (n > 16 || graph.edge_count() > 24) {
    throw InputError("brute-force min-ratio cycle: instance exceeds the "
                     "enumeration bound (16 vertices or 24 edges)");
  }
  std::optional<CycleSolution> best;
  std::vector<bool> on_path(n, false);
  std::vector<EdgeId> path_edges;
  std::vector<VertexId> path_vertices;

  auto record = [&](EdgeId closing) {
    Circulation c;
    double g = 0.0;
    double len = 0.0;
    path_edges.push_back(closing);
    for (std::size_t i = 0; i < path_edges.size(); ++i) {
      const EdgeId e = path_edges[i];
      const VertexId from = path_vertices[i];
      const double dir = graph.tails()[e] == from ? 1.0 : -1.0;
      c.append(e, dir);
      g += dir * instance.gradient[e];
      len += instance.length[e];
    }
    path_edges.pop_back();
    const double sign = g > 0 ? -1.0 : 1.0;
    const double ratio = sign * g / len;
    if (!best || ratio < best->ratio) {
      c.scale(sign);
      best = CycleSolution{std::move(c), ratio, std::nullopt};
    }
  };

  // Cycles are rooted at their smallest vertex s; the path only visits larger
  // vertices.
  auto dfs = [&](auto&& self, VertexId s, VertexId x) -> void {
    for (EdgeId e : graph.incident(x)) {
      if (!path_edges.empty() && e == path_edges.back()) continue;
      const VertexId y = graph.other_end(e, x);
      if (y == s) {
        record(e);
      } else if (y > s && !on_path[y]) {
        on_path[y] = true;
        path_edges.push_back(e);
        path_vertices.push_back(y);
        self(self, s, y);
        path_vertices.pop_back();
        path_edges.pop_back();
        on_path[y] = false;
      }
    }
  };

  for (VertexId s = 0; s < n; ++s) {
    on_path[s] = true;
    path_vertices.assign(1, s);
    dfs(dfs, s, s);
    on_path[s] = false;
  }
  return best;
}

std::optional<Circulation> find_negative_cycle(const MrcInstance& instance,
                                               double mu,
                                               std::vector<double>* potential) {
  const auto& graph = instance.graph;
  const auto n = graph.vertex_count();
  const auto m = graph.edge_count();
  if (m == 0) return std::nullopt;

  // Arc 2e runs tail -> head, arc 2e + 1 runs head -> tail.
  auto arc_weight = [&](std::size_t arc) {
    const auto e = arc / 2;
    const double g = (arc % 2 == 0) ? instance.gradient[e] : -instance.gradient[e];
    return g - mu * instance.length[e];
  };
  auto arc_tail = [&](std::size_t arc) {
    const auto e = arc / 2;
    return arc % 2 == 0 ? graph.tails()[e] : graph.heads()[e];
  };

  std::vector<double> dist;
  if (potential != nullptr && potential->size() == n) {
    dist = *potential;
  } else {
    dist.assign(n, 0.0);
  }
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pred(n, kNone);
  std::vector<bool> queued(n, true);
  std::deque<VertexId> queue(n);
  std::iota(queue.begin(), queue.end(), 0);

  std::vector<std::size_t> seen(n);

  // Walks the predecessor graph; any cycle in it has negative weight.
  auto predecessor_cycle = [&]() -> std::optional<VertexId> {
    std::fill(seen.begin(), seen.end(), kNone);
    for (VertexId start = 0; start < n; ++start) {
      VertexId x = start;
      while (seen[x] == kNone) {
        seen[x] = start;
        if (pred[x] == kNone) break;
        x = arc_tail(pred[x]);
      }
      if (seen[x] == start && pred[x] != kNone) return x;
    }
    return std::nullopt;
  };

  std::size_t relaxations = 0;
  while (!queue.empty()) {
    const VertexId x = queue.front();
    queue.pop_front();
    queued[x] = false;
    for (EdgeId e : graph.incident(x)) {
      const std::size_t arc = graph.tails()[e] == x ? 2 * e : 2 * e + 1;
      const VertexId y = graph.other_end(e, x);
      const double candidate = dist[x] + arc_weight(arc);
      // The margin keeps rounding from closing zero-weight cycles, such as an
      // edge and its reverse at mu = 0.
      if (candidate < dist[y] - 1e-12 * (1.0 + std::abs(dist[y]))) {
        dist[y] = candidate;
        pred[y] = arc;
        if (!queued[y]) {
          queued[y] = true;
          queue.push_back(y);
        }
        if (++relaxations % n == 0) {
          if (auto on_cycle = predecessor_cycle()) {
            // Collect arcs around the cycle, walking predecessors.
            std::vector<std::size_t> arcs;
            VertexId z = *on_cycle;
            do {
              arcs.push_back(pred[z]);
              z = arc_tail(pred[z]);
            } while (z != *on_cycle);
            std::reverse(arcs.begin(), arcs.end());
            // Opposing arcs of one edge cancel.
            std::vector<double> net;
            std::vector<EdgeId> order;
            for (auto a : arcs) {
              const EdgeId edge = static_cast<EdgeId>(a / 2);
              if (net.size() <= edge) net.resize(edge + 1, 0.0);
              if (net[edge] == 0.0) order.push_back(edge);
              net[edge] += (a % 2 == 0) ? 1.0 : -1.0;
            }
            Circulation c;
            double weight = 0.0;
            for (EdgeId edge : order) {
              if (net[edge] == 0.0) continue;
              c.append(edge, net[edge]);
              weight += arc_weight(net[edge] > 0 ? 2 * edge : 2 * edge + 1);
            }
            if (c.empty() || !(weight < 0.0)) {
              // Spurious: cut it and keep relaxing.
              pred[*on_cycle] = kNone;
              continue;
            }
            if (potential != nullptr) potential->clear();
            return c;
          }
        }
      }
    }
  }
  if (potential != nullptr) *potential = std::move(dist);
  return std::nullopt;
}

std::optional<CycleSolution> exact_min_ratio_cycle(const MrcInstance& instance,
                                                   double tol) {
  if (!(tol > 0.0)) throw InputError("exact_min_ratio_cycle: tol must be positive");
  auto first = find_negative_cycle(instance, 0.0);
  if (!first) {
    // No cycle is negative at mu = 0, so every cycle has zero gradient sum in
    // both orientations (or there are none).
    auto c = any_cycle(instance.graph);
    if (!c) return std::nullopt;
    return make_solution(instance, std::move(*c));
  }
  CycleSolution best = make_solution(instance, std::move(*first));
  double max_g = 0.0;
  for (double g : instance.gradient) max_g = std::max(max_g, std::abs(g));
  const double min_len =
      *std::min_element(instance.length.begin(), instance.length.end());
  double lo = -max_g * static_cast<double>(instance.edge_count()) / min_len;
  double hi = best.ratio;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (auto c = find_negative_cycle(instance, mid)) {
      auto candidate = make_solution(instance, std::move(*c));
      if (candidate.ratio < best.ratio) best = std::move(candidate);
      hi = std::min(mid, best.ratio);
    } else {
      lo = mid;
    }
  }
  return best;
}

std::size_t UpdateLog::edge_id_bound() const {
  std::size_t bound = 0;
  for (const auto& batch : batches) {
    for (const auto& u : batch) bound = std::max<std::size_t>(bound, u.edge + 1);
  }
  return bound;
}

namespace {

struct StageState {
  std::vector<bool> present;
  std::vector<double> length;
  std::vector<VertexId> tail;
  std::vector<VertexId> head;
};

void apply_batch(StageState& state, const std::vector<LoggedUpdate>& batch) {
  for (const auto& u : batch) {
    if (u.kind == LoggedUpdate::Kind::insert) {
      state.present[u.edge] = true;
      state.length[u.edge] = u.length;
      state.tail[u.edge] = u.tail;
      state.head[u.edge] = u.head;
    } else {
      state.present[u.edge] = false;
    }
  }
}

}  // namespace

WitnessReport hsfc_witness_check(const UpdateLog& log,
                                 const HiddenWitness& witness) {
  const auto stages = log.stage_count();
  const auto bound = log.edge_id_bound();
  if (witness.circulation.size() != stages || witness.width.size() != stages) {
    throw InputError("hsfc_witness_check: witness has wrong number of stages");
  }
  for (std::size_t t = 0; t < stages; ++t) {
    if (witness.circulation[t].size() < bound || witness.width[t].size() < bound) {
      throw InputError("hsfc_witness_check: witness vector shorter than edge ids");
    }
  }
  constexpr double kRel = 1e-12;
  StageState state{std::vector<bool>(bound, false), std::vector<double>(bound, 0.0),
                   std::vector<VertexId>(bound, 0), std::vector<VertexId>(bound, 0)};
  // Stage at which each edge was last (re)inserted.
  std::vector<std::size_t> since(bound, 0);
  double previous_total = 0.0;
  for (std::size_t t = 0; t < stages; ++t) {
    apply_batch(state, log.batches[t]);
    for (const auto& u : log.batches[t]) since[u.edge] = t;
    const auto& c = witness.circulation[t];
    const auto& w = witness.width[t];

    std::vector<double> demand(log.vertex_count, 0.0);
    double c_max = 0.0;
    for (std::size_t e = 0; e < bound; ++e) {
      if (!state.present[e]) {
        if (c[e] != 0.0) return {false, 1, t};
        continue;
      }
      demand[state.tail[e]] -= c[e];
      demand[state.head[e]] += c[e];
      c_max = std::max(c_max, std::abs(c[e]));
    }
    if (linf_norm(demand) > 1e-8 * (1.0 + c_max)) return {false, 1, t};

    double total = 0.0;
    for (std::size_t e = 0; e < bound; ++e) {
      if (!state.present[e]) continue;
      const double need = std::abs(state.length[e] * c[e]);
      if (need > w[e] * (1.0 + kRel)) return {false, 2, t};
      total += w[e];
      for (std::size_t earlier = since[e]; earlier < t; ++earlier) {
        if (w[e] > 2.0 * witness.width[earlier][e] * (1.0 + kRel)) {
          return {false, 3, t};
        }
      }
    }
    if (t > 0 && total < previous_total * (1.0 - kRel)) return {false, 4, t};
    previous_total = total;
  }
  return {};
}

HiddenWitness canonical_witness(const UpdateLog& log,
                                std::span<const double> c_star) {
  const auto stages = log.stage_count();
  const auto bound = std::max(log.edge_id_bound(), c_star.size());
  HiddenWitness witness;
  StageState state{std::vector<bool>(bound, false), std::vector<double>(bound, 0.0),
                   std::vector<VertexId>(bound, 0), std::vector<VertexId>(bound, 0)};
  for (std::size_t t = 0; t < stages; ++t) {
    apply_batch(state, log.batches[t]);
    bool supported = true;
    for (std::size_t e = 0; e < c_star.size(); ++e) {
      if (c_star[e] != 0.0 && !state.present[e]) supported = false;
    }
    std::vector<double> c(bound, 0.0);
    std::vector<double> w(bound, 0.0);
    for (std::size_t e = 0; e < c_star.size(); ++e) {
      if (c_star[e] == 0.0 || !state.present[e]) continue;
      w[e] = std::abs(state.length[e] * c_star[e]);
      if (supported) c[e] = c_star[e];
    }
    witness.circulation.push_back(std::move(c));
    witness.width.push_back(std::move(w));
  }
  return witness;
}

MonotoneMrc::MonotoneMrc(MrcInstance instance, double alpha,
                         const MrcOptions& options)
    : instance_(std::move(instance)), alpha_(alpha), options_(options) {
  if (!(alpha > 0.0)) throw InputError("min-ratio cycle oracle: alpha must be positive");
  if (!(options_.kappa >= 1.0)) throw InputError("min-ratio cycle oracle: kappa must be >= 1");
  if (options_.backend == MrcBackend::exact && options_.kappa != 1.0) {
    throw InputError("min-ratio cycle oracle: the exact backend has kappa = 1");
  }
  log_.vertex_count = instance_.vertex_count();
  if (options_.record_log) {
    log_.batches.emplace_back();
    for (EdgeId e = 0; e < instance_.edge_count(); ++e) {
      log_.batches.back().push_back({LoggedUpdate::Kind::insert, e,
                                     instance_.graph.tails()[e],
                                     instance_.graph.heads()[e],
                                     instance_.gradient[e], instance_.length[e]});
    }
  }
  if (options_.backend == MrcBackend::trees) rebuild_trees();
}

EdgeId MonotoneMrc::update(const MrcUpdate& update) {
  if (const auto* ins = std::get_if<InsertEdge>(&update)) {
    return insert_edge(ins->tail, ins->head, ins->gradient, ins->length);
  }
  const auto& inc = std::get<IncreaseLength>(update);
  increase_length(inc.edge, inc.length);
  return inc.edge;
}

EdgeId MonotoneMrc::insert_edge(VertexId u, VertexId v, double gradient,
                                double length) {
  const bool joins = !instance_.graph.connected(u, v);
  const auto e = instance_.add_edge(u, v, gradient, length);
  ++stats_.updates;
  dirty_ = true;
  if (options_.record_log) {
    log_.batches.push_back({{LoggedUpdate::Kind::insert, e, u, v, gradient, length}});
  }
  if (options_.backend == MrcBackend::trees) {
    for (auto& tree : trees_) tree.in_tree.push_back(joins);
    trees_stale_ = true;
  }
  return e;
}

void MonotoneMrc::increase_length(EdgeId e, double length) {
  if (e >= instance_.edge_count()) {
    throw InputError("increase_length: unknown edge " + std::to_string(e));
  }
  const double current = instance_.length[e];
  if (!(length >= current)) {
    throw InvariantViolation("increase_length: length of edge " +
                             std::to_string(e) + " would decrease");
  }
  if (length == current) return;
  instance_.length[e] = length;
  ++stats_.updates;
  dirty_ = true;
  trees_stale_ = true;
  if (options_.record_log) {
    const auto u = instance_.graph.tails()[e];
    const auto v = instance_.graph.heads()[e];
    const double g = instance_.gradient[e];
    log_.batches.push_back({{LoggedUpdate::Kind::remove, e, u, v, g, current},
                            {LoggedUpdate::Kind::insert, e, u, v, g, length}});
  }
}

double MonotoneMrc::total_length() const {
  return std::accumulate(instance_.length.begin(), instance_.length.end(), 0.0);
}

void MonotoneMrc::rebuild_trees() {
  const auto& graph = instance_.graph;
  const auto n = graph.vertex_count();
  const auto m = graph.edge_count();
  std::size_t count = options_.tree_count;
  if (count == 0) {
    count = 4 * static_cast<std::size_t>(
                    std::ceil(std::log2(std::max<std::size_t>(n, 2))));
  }
  trees_.assign(count, SpanningTree{});
  std::vector<double> key(m);
  for (std::size_t i = 0; i < count; ++i) {
    // Tree 0 is the minimum-length forest; the rest use randomly perturbed
    // lengths, each factor drawn from [1, 4).
    std::mt19937_64 rng(derive_seed(options_.seed, stats_.rebuilds, i));
    std::uniform_real_distribution<double> factor(0.0, std::log(4.0));
    for (EdgeId e = 0; e < m; ++e) {
      key[e] = instance_.length[e] * (i == 0 ? 1.0 : std::exp(factor(rng)));
    }
    trees_[i].in_tree = minimum_spanning_forest(graph, key);
  }
  ++stats_.rebuilds;
  checkpoint_length_ = total_length();
  trees_stale_ = true;
}

void MonotoneMrc::refresh_tree(SpanningTree& tree) const {
  build_structure(instance_.graph, tree);
  accumulate_root_sums(instance_, tree);
}

std::optional<CycleSolution> MonotoneMrc::best_fundamental_cycle() {
  if (options_.backend != MrcBackend::trees) {
    throw InputError("best_fundamental_cycle: requires the trees backend");
  }
  if (total_length() >= 2.0 * checkpoint_length_) rebuild_trees();
  if (trees_stale_) {
    for (auto& tree : trees_) refresh_tree(tree);
    trees_stale_ = false;
  }
  const auto& graph = instance_.graph;
  std::optional<TreePathCycle> best_form;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    const auto& tree = trees_[i];
    for (EdgeId e = 0; e < graph.edge_count(); ++e) {
      if (tree.in_tree[e]) continue;
      const VertexId u = graph.tails()[e];
      const VertexId v = graph.heads()[e];
      const VertexId top = lowest_common_ancestor(tree, u, v);
      const double g =
          instance_.gradient[e] + tree.root_gradient[u] - tree.root_gradient[v];
      const double len = instance_.length[e] + tree.root_length[u] +
                         tree.root_length[v] - 2.0 * tree.root_length[top];
      const double ratio = -std::abs(g) / len;
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best_form = TreePathCycle{i, e, g < 0 ? 1.0 : -1.0};
      }
    }
  }
  if (!best_form) return std::nullopt;
  auto c = expand(*best_form);
  auto solution = make_solution(instance_, std::move(c));
  solution.tree_form = best_form;
  return solution;
}

Circulation MonotoneMrc::expand(const TreePathCycle& form) const {
  return fundamental_cycle(instance_.graph, trees_.at(form.tree),
                           form.off_tree_edge, form.sign);
}

std::optional<CycleSolution> MonotoneMrc::query_exact() {
  std::vector<double>* warm = potential_valid_ ? &potential_ : nullptr;
  if (!warm) potential_.clear();
  auto c = find_negative_cycle(instance_, -alpha_, &potential_);
  potential_valid_ = !c.has_value();
  if (!c) return std::nullopt;
  return make_solution(instance_, std::move(*c));
}

std::optional<CycleSolution> MonotoneMrc::query() {
  ++stats_.queries;
  if (!dirty_) return cached_;
  ++stats_.solves;
  dirty_ = false;
  const double target = -alpha_ / options_.kappa;
  if (options_.backend == MrcBackend::exact) {
    cached_ = query_exact();
  } else {
    cached_ = best_fundamental_cycle();
    if (cached_ && !(cached_->ratio <= target)) cached_.reset();
    if (!cached_ && options_.validate_kappa) {
      if (auto missed = find_negative_cycle(instance_, -alpha_)) {
        throw ConfigurationError(
            "tree collection missed a cycle of ratio " +
            std::to_string(cycle_ratio(instance_, *missed)) +
            " <= -alpha; the configured kappa does not hold");
      }
    }
  }
  return cached_;
}

}  // namespace incflow
