#pragma once

#include <stdexcept>
#include <string>

namespace dfl {

// Maps to CLI exit code 4.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Maps to CLI exit code 3.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Maps to CLI exit code 2 (an asserted inequality failed beyond tolerance).
struct ToleranceFailure : std::runtime_error {
  explicit ToleranceFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dfl
