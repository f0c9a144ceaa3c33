#include "edgefl/error.hpp"

namespace edgefl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kNoBracket: return "no_bracket";
    case ErrorCode::kLatencyInfeasible: return "latency_infeasible";
    case ErrorCode::kEnergyInfeasible: return "energy_infeasible";
    case ErrorCode::kNoPositiveRoot: return "no_positive_root";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kWeight: return "weight";
    case ErrorCode::kDegenerateWeight: return "degenerate_weight";
    case ErrorCode::kEmptySet: return "empty_set";
    case ErrorCode::kUnknownDevice: return "unknown_device";
    case ErrorCode::kConstraintC3: return "single_selection_violated";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kUnknownParameter: return "unknown_parameter";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace edgefl
