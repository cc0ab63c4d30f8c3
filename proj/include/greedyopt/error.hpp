#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace greedyopt {

enum class ErrorKind {
  EmptyStream,
  DimensionMismatch,
  NonFinite,
  InsufficientSamples,
  InvalidBudget,
  NonPSDInput,
  ZeroMatrix,
  NonConvergence,
  InconsistentTarget,
  NonPositiveCost,
  Divergence,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyStream: return "EmptyStream";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InvalidBudget: return "InvalidBudget";
    case ErrorKind::NonPSDInput: return "NonPSDInput";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::InconsistentTarget: return "InconsistentTarget";
    case ErrorKind::NonPositiveCost: return "NonPositiveCost";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Numerical failures map to exit code 1, everything else is a usage problem.
  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::NonConvergence || kind_ == ErrorKind::Divergence ||
           kind_ == ErrorKind::InconsistentTarget || kind_ == ErrorKind::NonFinite;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace greedyopt
