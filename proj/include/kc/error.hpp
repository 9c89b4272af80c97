#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kc {

enum class ErrorCode {
  // core_model
  NegativeWeight,
  WeightsNotNormalized,
  LengthMismatch,
  NonFinite,
  SourceMismatch,
  DimensionMismatch,
  InvalidOrder,
  // transport
  SizeCapExceeded,
  EmptySelection,
  // selection
  EnumerationGuard,
  InfeasibleBudget,
  EmptyInstance,
  EmptyHistory,
  // pipeline
  EmptyCloud,
  UnselectedAssignment,
  StageBudgetInfeasible,
  // risk
  MissingValue,
  InvalidKappa,
  IndexRange,
  // generators
  NotPositiveDefinite,
  DimUnsupported,
  DegenerateBox,
  // experiment / cli
  ConfigParse,
  ConfigValidation,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kc
