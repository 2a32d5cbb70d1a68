#include "incflow/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "incflow/forest.hpp"
#include "incflow/random.hpp"

namespace incflow {

namespace {

std::vector<double> hessian_diagonal(const ObjectiveTerms& terms,
                                     std::span<const double> f) {
  const double p = terms.p;
  std::vector<double> d(f.size());
  for (std::size_t e = 0; e < f.size(); ++e) {
    const double r = terms.resistance[e];
    const double wp = std::pow(terms.weight[e], p);
    const double curv = terms.p == 2 ? 1.0 : std::pow(std::abs(f[e]), p - 2.0);
    d[e] = 2.0 * r * r + p * (p - 1.0) * wp * curv;
  }
  return d;
}

}  // namespace

OracleReport static_pnorm_opt(const IncrementalGraph& graph,
                              const ObjectiveTerms& terms,
                              std::span<const double> demand, double tol,
                              std::uint64_t seed) {
  const auto m = graph.edge_count();
  if (terms.size() != m) throw InputError("static_pnorm_opt: attribute size mismatch");
  if (demand.size() != graph.vertex_count()) {
    throw InputError("static_pnorm_opt: demand size mismatch");
  }
  if (!demand_routable(graph, demand)) {
    throw InputError("static_pnorm_opt: demand is not routable");
  }

  SpanningTree tree;
  std::vector<double> key(m);
  if (seed != 0) {
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& k : key) k = u(rng);
  }
  tree.in_tree = minimum_spanning_forest(graph, key);
  build_structure(graph, tree);

  OracleReport report;
  report.flow = tree_routing(graph, tree, demand);

  std::vector<Circulation> basis;
  for (EdgeId e = 0; e < m; ++e) {
    if (!tree.in_tree[e]) basis.push_back(fundamental_cycle(graph, tree, e, 1.0));
  }
  const auto k = static_cast<Eigen::Index>(basis.size());
  auto& f = report.flow;
  double value = evaluate(terms, f);

  for (;;) {
    const auto grad = objective_gradient(terms, f);
    Eigen::VectorXd cg(k);
    for (Eigen::Index i = 0; i < k; ++i) cg[i] = basis[i].dot(grad);
    report.gradient_norm = cg.norm();
    if (report.gradient_norm <= tol * (1.0 + std::abs(value))) {
      report.converged = true;
      break;
    }
    if (report.iterations == 500) break;
    ++report.iterations;

    const auto diag = hessian_diagonal(terms, f);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k, k);
    // Cycles only overlap on tree edges, so a per-edge incidence list keeps
    // the assembly at O(sum of squared edge loads).
    std::vector<std::vector<std::pair<Eigen::Index, double>>> on_edge(m);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (const auto& t : basis[i].terms()) on_edge[t.edge].push_back({i, t.value});
    }
    for (std::size_t e = 0; e < m; ++e) {
      for (const auto& [i, a] : on_edge[e]) {
        for (const auto& [j, b] : on_edge[e]) hess(i, j) += diag[e] * a * b;
      }
    }
    Eigen::VectorXd dir = -hess.ldlt().solve(cg);
    if (!dir.allFinite() || dir.dot(cg) >= 0.0) dir = -cg;

    std::vector<double> step(m, 0.0);
    for (Eigen::Index i = 0; i < k; ++i) basis[i].add_to(step, dir[i]);
    const double slope = dir.dot(cg);
    double t = 1.0;
    std::vector<double> trial(m);
    bool moved = false;
    for (int tries = 0; tries < 60; ++tries, t *= 0.5) {
      for (std::size_t e = 0; e < m; ++e) trial[e] = f[e] + t * step[e];
      const double next = evaluate(terms, trial);
      if (next <= value + 1e-4 * t * slope && next < value) {
        moved = true;
        f.swap(trial);
        value = next;
        break;
      }
    }
    if (!moved) {
      // Near the optimum the decrease drops below the rounding of E; take
      // the full Newton step if it shrinks the projected gradient instead.
      for (std::size_t e = 0; e < m; ++e) trial[e] = f[e] + step[e];
      const auto trial_grad = objective_gradient(terms, trial);
      double norm2 = 0.0;
      for (const auto& c : basis) {
        const double x = c.dot(trial_grad);
        norm2 += x * x;
      }
      if (!(std::sqrt(norm2) < 0.5 * report.gradient_norm)) break;
      f.swap(trial);
      value = evaluate(terms, f);
    }
  }
  report.optimum = value;
  return report;
}

OracleReport static_pnorm_opt(const PNormInstance& instance, double tol,
                              std::uint64_t seed) {
  return static_pnorm_opt(instance.graph(), instance.terms(), instance.demand(),
                          tol, seed);
}

MaxflowResult exact_maxflow(const IncrementalGraph& graph,
                            std::span<const std::int64_t> capacity, VertexId s,
                            VertexId t) {
  const auto n = graph.vertex_count();
  const auto m = graph.edge_count();
  if (s == t) throw InputError("exact_maxflow: s equals t");
  if (s >= n || t >= n) throw InputError("exact_maxflow: terminal out of range");
  if (capacity.size() != m) throw InputError("exact_maxflow: capacity size mismatch");

  // Arc 2e runs tail -> head, 2e + 1 head -> tail; each is the other's reverse
  // and both start with the full capacity.
  std::vector<std::int64_t> residual(2 * m);
  std::vector<VertexId> arc_head(2 * m);
  std::vector<std::vector<std::size_t>> out(n);
  for (EdgeId e = 0; e < m; ++e) {
    if (capacity[e] < 0) throw InputError("exact_maxflow: negative capacity");
    residual[2 * e] = residual[2 * e + 1] = capacity[e];
    arc_head[2 * e] = graph.heads()[e];
    arc_head[2 * e + 1] = graph.tails()[e];
    out[graph.tails()[e]].push_back(2 * e);
    out[graph.heads()[e]].push_back(2 * e + 1);
  }

  std::vector<int> level(n);
  std::vector<std::size_t> next(n);
  auto bfs = [&] {
    std::fill(level.begin(), level.end(), -1);
    std::deque<VertexId> queue{s};
    level[s] = 0;
    while (!queue.empty()) {
      const VertexId x = queue.front();
      queue.pop_front();
      for (auto a : out[x]) {
        if (residual[a] > 0 && level[arc_head[a]] < 0) {
          level[arc_head[a]] = level[x] + 1;
          queue.push_back(arc_head[a]);
        }
      }
    }
    return level[t] >= 0;
  };
  auto dfs = [&](auto&& self, VertexId x, std::int64_t limit) -> std::int64_t {
    if (x == t) return limit;
    for (; next[x] < out[x].size(); ++next[x]) {
      const auto a = out[x][next[x]];
      const VertexId y = arc_head[a];
      if (residual[a] <= 0 || level[y] != level[x] + 1) continue;
      if (auto pushed = self(self, y, std::min(limit, residual[a])); pushed > 0) {
        residual[a] -= pushed;
        residual[a ^ 1] += pushed;
        return pushed;
      }
    }
    return 0;
  };

  MaxflowResult result;
  while (bfs()) {
    std::fill(next.begin(), next.end(), 0);
    while (auto pushed = dfs(dfs, s, std::numeric_limits<std::int64_t>::max())) {
      result.value += pushed;
    }
  }
  result.flow.resize(m);
  for (EdgeId e = 0; e < m; ++e) {
    result.flow[e] = (residual[2 * e + 1] - residual[2 * e]) / 2;
  }
  return result;
}

double effective_resistance(const IncrementalGraph& graph,
                            std::span<const double> resistance, VertexId s,
                            VertexId t) {
  const auto n = graph.vertex_count();
  if (s >= n || t >= n) throw InputError("effective_resistance: vertex out of range");
  if (resistance.size() != graph.edge_count()) {
    throw InputError("effective_resistance: resistance size mismatch");
  }
  if (s == t) return 0.0;
  if (!graph.connected(s, t)) {
    throw InputError("effective_resistance: s and t are disconnected");
  }
  // Index the component of s, with t grounded (left out).
  std::vector<Eigen::Index> index(n, -1);
  std::vector<VertexId> stack{s};
  std::vector<bool> seen(n, false);
  seen[s] = true;
  Eigen::Index size = 0;
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    if (x != t) index[x] = size++;
    for (EdgeId e : graph.incident(x)) {
      const VertexId y = graph.other_end(e, x);
      if (!seen[y]) {
        seen[y] = true;
        stack.push_back(y);
      }
    }
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(size, size);
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    const auto iu = index[graph.tails()[e]];
    const auto iv = index[graph.heads()[e]];
    if (!seen[graph.tails()[e]]) continue;
    if (!(resistance[e] > 0.0)) throw InputError("effective_resistance: resistance must be positive");
    const double c = 1.0 / resistance[e];
    if (iu >= 0) lap(iu, iu) += c;
    if (iv >= 0) lap(iv, iv) += c;
    if (iu >= 0 && iv >= 0) {
      lap(iu, iv) -= c;
      lap(iv, iu) -= c;
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs[index[s]] = 1.0;
  const Eigen::VectorXd x = lap.llt().solve(rhs);
  return x[index[s]];
}

double finite_diff_check(const ObjectiveTerms& terms, std::span<const double> f,
                         std::span<const double> analytic, double h) {
  if (!(h > 0.0)) throw InputError("finite_diff_check: h must be positive");
  std::vector<double> x(f.begin(), f.end());
  double worst = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double saved = x[e];
    x[e] = saved + h;
    const double up = evaluate(terms, x);
    x[e] = saved - h;
    const double down = evaluate(terms, x);
    x[e] = saved;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[e] - numeric) /
                                std::max(1.0, std::abs(analytic[e])));
  }
  return worst;
}

double finite_diff_check(const ObjectiveTerms& terms, std::span<const double> f,
                         double h) {
  const auto grad = objective_gradient(terms, f);
  return finite_diff_check(terms, f, grad, h);
}

}  // namespace incflow
