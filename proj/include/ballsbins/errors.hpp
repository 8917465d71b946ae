#pragma once

#include <stdexcept>
#include <string>

namespace ballsbins {

// Every message starts with a stable prefix so callers (and the CLI) can
// dispatch on it without parsing free text.
namespace prefix {
inline constexpr const char* malformed = "malformed input: ";
inline constexpr const char* mismatch = "length mismatch: ";
inline constexpr const char* out_of_range = "bin index out of range: ";
inline constexpr const char* invalid = "invalid argument: ";
inline constexpr const char* budget = "budget exceeded: ";
}  // namespace prefix

/// Bad user input: parse failures, inconsistent lengths, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured state/node/enumeration budget would be exceeded.
/// Computations never truncate silently; they throw this instead.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail_malformed(const std::string& what) {
  throw ValidationError(std::string(prefix::malformed) + what);
}
[[noreturn]] inline void fail_mismatch(const std::string& what) {
  throw ValidationError(std::string(prefix::mismatch) + what);
}
[[noreturn]] inline void fail_out_of_range(const std::string& what) {
  throw ValidationError(std::string(prefix::out_of_range) + what);
}
[[noreturn]] inline void fail_invalid(const std::string& what) {
  throw ValidationError(std::string(prefix::invalid) + what);
}
[[noreturn]] inline void fail_budget(const std::string& what) {
  throw BudgetExceeded(std::string(prefix::budget) + what);
}

}  // namespace ballsbins
