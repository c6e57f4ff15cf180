#pragma once

#include <stdexcept>
#include <string>

namespace ibkit {

enum class ErrorCode {
  NotNormalized,
  NegativeMass,
  SupportMismatch,
  DimensionMismatch,
  OutOfRange,
  DegenerateInput,
  InvalidNoise,
  UnknownFixture,
  NoConvergence,
  OrderViolation,
  EmptyCluster,
  DegenerateForm,
  InvalidPerturbation,
  DivergedRatio,
  ConstantH,
  IndependentXY,
  EmptySubset,
  DegenerateNoise,
  DegenerateSubset,
  TooFewBins,
  BudgetExceeded,
  InconsistentInputs,
  ParseError,
};

// Stable machine-readable code string, used verbatim in CLI error output.
const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const char* code_name() const noexcept { return error_code_name(code_); }

private:
  ErrorCode code_;
};

}  // namespace ibkit
