#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "incflow/circulation.hpp"
#include "incflow/graph.hpp"
#include "incflow/mrc.hpp"

namespace incflow {

// Global parameters of the multiplicative-weights residual solver, fixed from
// the final edge bound m_hat:
//   q = max(1, min(floor(log2 m_hat), p)), K = 100 q kappa,
//   alpha = K^(1-q) / (40 q), T = 100 q m_hat.
struct MwuConstants {
  int p;
  int q;
  double kappa;
  double K;
  double alpha;
  std::size_t T;
  std::size_t m_hat;

  // 20 q K^(q-1): l1 length of any circulation with <g, c> = -1 and unit
  // R- and W-norms, under the lengths of any iteration.
  double good_solution_bound() const;
};

MwuConstants mwu_constants(int p, std::size_t m_hat, double kappa);

// One event per batch of identical iterations.
struct MwuTraceEvent {
  std::size_t iteration;
  double phi;
  double psi;
  double ratio;
};

struct MwuOptions {
  MrcOptions mrc;
  bool assert_invariants = false;
  std::function<void(const MwuTraceEvent&)> trace;
};

struct MwuDiagnostics {
  double initial_phi = 0.0;
  double initial_psi = 0.0;
  // Largest single-step increases, as fractions of 3K^2/T and 4qK^q/T.
  double worst_phi_step = 0.0;
  double worst_psi_step = 0.0;
  std::size_t iterations = 0;
  // Runs of identical iterations applied together.
  std::size_t batches = 0;
  std::size_t stalls = 0;
  std::size_t insertions = 0;
  std::size_t potential_violations = 0;
  std::size_t monotonicity_violations = 0;
  std::size_t domination_violations = 0;
  std::size_t length_pushes = 0;
};

enum class MwuStep { progress, stalled };

struct MwuEvent {
  VertexId tail;
  VertexId head;
  double gradient;
  double resistance;
  double weight;
};

// Supplies edge insertions while the solver is stalled.
class MwuEventSource {
 public:
  virtual ~MwuEventSource() = default;
  // The current graph supports no circulation c with <g, c> = -1,
  // ||R c||_2 <= 1 and ||W c||_p <= 1.
  virtual void certified() = 0;
  virtual std::optional<MwuEvent> next() = 0;
};

struct MwuRunResult {
  bool solved = false;
  std::vector<double> circulation;
};

// Incremental K-approximate residual solver: l1 multiplicative weights over a
// monotone min-ratio cycle oracle. After T progress steps the averaged
// circulation has <g, c> = -1, ||R c||_2 <= 2K and ||W c||_p <= 2K.
class IncrementalMwu {
 public:
  IncrementalMwu(const IncrementalGraph& graph, std::vector<double> gradient,
                 std::vector<double> resistance, std::vector<double> weight,
                 int p, std::size_t m_hat, MwuOptions options);

  // `e` must be the next edge id.
  void insert_edge(EdgeId e, const MwuEvent& event);

  // One iteration.
  MwuStep step();
  // Up to `limit` iterations with the current oracle answer, stopping after
  // the first one that pushes a length estimate. Returns the number done;
  // 0 means the oracle stalled. Equivalent to calling step() repeatedly.
  std::size_t advance(std::size_t limit);
  // Steps until T iterations are done (returns c^(T)) or the oracle stalls.
  std::optional<std::vector<double>> run_until_blocked();
  MwuRunResult run(MwuEventSource& source);

  bool finished() const { return iteration_ == constants_.T; }
  std::size_t iteration() const { return iteration_; }
  const MwuConstants& constants() const { return constants_; }
  const MwuDiagnostics& diagnostics() const { return diagnostics_; }
  std::span<const double> circulation() const { return circulation_; }
  std::span<const double> lengths() const { return length_; }
  std::span<const double> length_estimates() const { return estimate_; }
  std::span<const double> gradient() const { return gradient_; }
  std::span<const double> resistance() const { return resistance_; }
  std::span<const double> weight() const { return weight_; }
  std::span<const double> a() const { return a_; }
  std::span<const double> b() const { return b_; }
  const Circulation& last_delta() const { return delta_; }
  const MonotoneMrc& oracle() const { return *oracle_; }

  // Recomputed from scratch.
  double phi() const;
  double psi() const;
  // ||L c||_1 with the current exact lengths.
  double current_length(std::span<const double> c) const;

 private:
  double edge_length(std::size_t e) const;
  // Length of e once a and b have both grown by `step`.
  double length_after(std::size_t e, double step) const;
  void append_edge(double g, double r, double w);
  void violation(std::size_t& counter, const std::string& what);

  MwuConstants constants_;
  MwuOptions options_;
  std::vector<double> gradient_;
  std::vector<double> resistance_;
  std::vector<double> weight_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> circulation_;
  std::vector<double> length_;
  std::vector<double> estimate_;
  std::optional<MonotoneMrc> oracle_;
  Circulation delta_;
  std::size_t iteration_ = 0;
  MwuDiagnostics diagnostics_;
};

}  // namespace incflow
