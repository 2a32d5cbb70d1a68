#pragma once

#include <span>
#include <vector>

#include "incflow/common.hpp"

namespace incflow {

struct EdgeTerm {
  EdgeId edge;
  double value;

  friend bool operator==(const EdgeTerm&, const EdgeTerm&) = default;
};

// Sparse signed edge vector. Terms are kept in the order they were appended;
// an edge appears at most once.
class Circulation {
 public:
  Circulation() = default;
  explicit Circulation(std::vector<EdgeTerm> terms) : terms_(std::move(terms)) {}

  std::span<const EdgeTerm> terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  void append(EdgeId e, double value) { terms_.push_back({e, value}); }

  void scale(double factor) {
    for (auto& t : terms_) t.value *= factor;
  }

  // Sum of value * column[edge].
  double dot(std::span<const double> column) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.value * column[t.edge];
    return s;
  }
  // Sum of |value| * column[edge].
  double weighted_l1(std::span<const double> column) const {
    double s = 0.0;
    for (const auto& t : terms_) s += (t.value < 0 ? -t.value : t.value) * column[t.edge];
    return s;
  }

  std::vector<double> to_dense(std::size_t edge_count) const {
    std::vector<double> dense(edge_count, 0.0);
    for (const auto& t : terms_) dense[t.edge] += t.value;
    return dense;
  }
  void add_to(std::span<double> dense, double factor = 1.0) const {
    for (const auto& t : terms_) dense[t.edge] += factor * t.value;
  }

  friend bool operator==(const Circulation&, const Circulation&) = default;

 private:
  std::vector<EdgeTerm> terms_;
};

}  // namespace incflow
