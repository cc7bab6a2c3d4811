#pragma once

#include <stdexcept>
#include <string>

namespace rigidity {

// Bad arguments or unsatisfiable preconditions for a construction
// (missing roots, infeasible plan, search exhaustion).
struct ConstructionError : std::runtime_error {
  explicit ConstructionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Field-level misuse: mismatched fields, division by zero, unsupported op.
struct FieldError : std::runtime_error {
  explicit FieldError(const std::string& msg) : std::runtime_error(msg) {}
};

// A proven identity failed to hold at runtime. Always a bug, never input error.
struct InvariantViolation : std::logic_error {
  explicit InvariantViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Malformed serialized input (JSON shape, unknown version, bad encodings).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rigidity
