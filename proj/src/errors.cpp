#include "ibkit/errors.hpp"

namespace ibkit {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotNormalized: return "not_normalized";
    case ErrorCode::NegativeMass: return "negative_mass";
    case ErrorCode::SupportMismatch: return "support_mismatch";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::DegenerateInput: return "degenerate_input";
    case ErrorCode::InvalidNoise: return "invalid_noise";
    case ErrorCode::UnknownFixture: return "unknown_fixture";
    case ErrorCode::NoConvergence: return "no_convergence";
    case ErrorCode::OrderViolation: return "order_violation";
    case ErrorCode::EmptyCluster: return "empty_cluster";
    case ErrorCode::DegenerateForm: return "degenerate_form";
    case ErrorCode::InvalidPerturbation: return "invalid_perturbation";
    case ErrorCode::DivergedRatio: return "diverged_ratio";
    case ErrorCode::ConstantH: return "constant_h";
    case ErrorCode::IndependentXY: return "independent_xy";
    case ErrorCode::EmptySubset: return "empty_subset";
    case ErrorCode::DegenerateNoise: return "degenerate_noise";
    case ErrorCode::DegenerateSubset: return "degenerate_subset";
    case ErrorCode::TooFewBins: return "too_few_bins";
    case ErrorCode::BudgetExceeded: return "budget_exceeded";
    case ErrorCode::InconsistentInputs: return "inconsistent_inputs";
    case ErrorCode::ParseError: return "parse_error";
  }
  return "unknown";
}

}  // namespace ibkit
