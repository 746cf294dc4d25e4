#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace gridseer {

// Internal positions. Buses are stored sorted by their external id, lines by
// their canonical (lower index, higher index) endpoint pair, meters in file
// order. All public sets of these are sorted ascending.
using BusIdx = std::size_t;
using LineIdx = std::size_t;
using MeterIdx = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Tolerance for equality assertions on desk-scale systems.
inline constexpr double kNumericTolerance = 1e-9;

inline constexpr const char* kToolVersion = "0.3.0";

enum class ErrorKind {
  kUsage,         // bad command line
  kInvalidInput,  // malformed or inconsistent case data
  kInfeasible,    // the requested plan does not exist
  kUnobservable,  // a rank-deficient system where observability is required
  kInternal,      // an invariant the library itself should guarantee failed
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kInvalidInput:
      return 2;
    case ErrorKind::kInfeasible:
    case ErrorKind::kUnobservable:
      return 3;
    case ErrorKind::kInternal:
      return 4;
  }
  return 4;
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return "usage";
    case ErrorKind::kInvalidInput:
      return "invalid_input";
    case ErrorKind::kInfeasible:
      return "infeasible";
    case ErrorKind::kUnobservable:
      return "unobservable";
    case ErrorKind::kInternal:
      return "internal";
  }
  return "internal";
}

// The single exception type thrown by the library. `detail` carries a
// machine-readable certificate (null vectors, unreachable buses, barriers).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        nlohmann::json detail = nullptr)
      : std::runtime_error(message), kind_(kind), detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  nlohmann::json detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              nlohmann::json detail = nullptr) {
  throw Error(kind, message, std::move(detail));
}

}  // namespace gridseer
