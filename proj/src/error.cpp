#include "dagma/error.hpp"

namespace dagma {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::singular_matrix: return "SingularMatrix";
    case ErrorCode::out_of_domain: return "OutOfDomain";
    case ErrorCode::dimension_too_large: return "DimensionTooLarge";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::non_binary_data: return "NonBinaryData";
    case ErrorCode::infeasible_density: return "InfeasibleDensity";
    case ErrorCode::cyclic_input: return "CyclicInput";
    case ErrorCode::cyclic_truth: return "CyclicTruth";
    case ErrorCode::non_finite_gradient: return "NonFiniteGradient";
    case ErrorCode::non_finite_objective: return "NonFiniteObjective";
    case ErrorCode::domain_collapse: return "DomainCollapse";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::io: return "IoError";
  }
  return "Error";
}

}  // namespace dagma
