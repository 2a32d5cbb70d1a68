#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace incflow {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

// Rejected input: malformed stream, out-of-range vertex, bad parameter.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A proven invariant failed at runtime. Always a bug or an unsound constant.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The tree-collection oracle missed a cycle the exact oracle found, i.e. the
// configured approximation factor does not hold on this instance.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace incflow
