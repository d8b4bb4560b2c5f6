#include "fbsde/error.hpp"

namespace fbsde {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SingularDiffusion: return "SingularDiffusion";
    case ErrorCode::OddN: return "OddN";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::OrderOutOfRange: return "OrderOutOfRange";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::MissingDerivative: return "MissingDerivative";
    case ErrorCode::PicardDiverged: return "PicardDiverged";
    case ErrorCode::DegenerateParameters: return "DegenerateParameters";
    case ErrorCode::BoxTouchesZero: return "BoxTouchesZero";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NonPositiveError: return "NonPositiveError";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace fbsde
