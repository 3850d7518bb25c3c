#include "dictcs/error.hpp"

namespace dictcs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::TooFewAtoms: return "TooFewAtoms";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NormTooLarge: return "NormTooLarge";
    case ErrorCode::Stalled: return "Stalled";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::NotRecoverable: return "NotRecoverable";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CellMismatch: return "CellMismatch";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::NotSymmetric:
    case ErrorCode::Stalled:
    case ErrorCode::Infeasible:
    case ErrorCode::MaxIterationsExceeded:
    case ErrorCode::CombinatorialBlowup:
      return true;
    default:
      return false;
  }
}

}  // namespace dictcs
