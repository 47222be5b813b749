// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/error.hpp"

namespace avatar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::PlaneSizeMismatch: return "PlaneSizeMismatch";
    case ErrorCode::EmptyTemplate: return "EmptyTemplate";
    case ErrorCode::RegionLabelMissing: return "RegionLabelMissing";
    case ErrorCode::WeightsMissing: return "WeightsMissing";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace avatar
