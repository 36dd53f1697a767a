#include "cutwave/error.hpp"

namespace cutwave {

const char* to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::ZeroTangent: return "ZeroTangent";
  case ErrorCode::StepTooCoarse: return "StepTooCoarse";
  case ErrorCode::SplitCellDetected: return "SplitCellDetected";
  case ErrorCode::UnmatchedFace: return "UnmatchedFace";
  case ErrorCode::ZeroLengthFace: return "ZeroLengthFace";
  case ErrorCode::CurveOutsideDomain: return "CurveOutsideDomain";
  case ErrorCode::RankDeficient: return "RankDeficient";
  case ErrorCode::IllConditionedMass: return "IllConditionedMass";
  case ErrorCode::MissingNeighborTrace: return "MissingNeighborTrace";
  case ErrorCode::UnknownBoundaryTag: return "UnknownBoundaryTag";
  case ErrorCode::IsolatedSmallCell: return "IsolatedSmallCell";
  case ErrorCode::SingularGram: return "SingularGram";
  case ErrorCode::DtUnderflow: return "DtUnderflow";
  case ErrorCode::NonLinearRHS: return "NonLinearRHS";
  case ErrorCode::NoConvergence: return "NoConvergence";
  case ErrorCode::DomainError: return "DomainError";
  case ErrorCode::RegionMismatch: return "RegionMismatch";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

} // namespace cutwave
