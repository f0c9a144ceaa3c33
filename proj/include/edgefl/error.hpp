#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgefl {

enum class ErrorCode {
  kDomain,
  kNoBracket,
  kLatencyInfeasible,
  kEnergyInfeasible,
  kNoPositiveRoot,
  kInfeasible,
  kWeight,
  kDegenerateWeight,
  kEmptySet,
  kUnknownDevice,
  kConstraintC3,
  kDimensionMismatch,
  kLengthMismatch,
  kConfig,
  kUnknownParameter,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a stable code so the CLI can
// print a machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edgefl
