#pragma once

#include <stdexcept>
#include <string>

namespace cutwave {

enum class ErrorCode {
  ZeroTangent,
  StepTooCoarse,
  SplitCellDetected,
  UnmatchedFace,
  ZeroLengthFace,
  CurveOutsideDomain,
  RankDeficient,
  IllConditionedMass,
  MissingNeighborTrace,
  UnknownBoundaryTag,
  IsolatedSmallCell,
  SingularGram,
  DtUnderflow,
  NonLinearRHS,
  NoConvergence,
  DomainError,
  RegionMismatch,
  InvalidConfig,
  InvalidInput,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace cutwave
