// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace avatar {

enum class ErrorCode {
  Io,
  Parse,
  BadMagic,
  CountMismatch,
  InvariantViolation,
  LengthMismatch,
  ResolutionMismatch,
  PlaneSizeMismatch,
  EmptyTemplate,
  RegionLabelMissing,
  WeightsMissing,
  DimensionMismatch,
  NonFiniteLoss,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the engine. The code identifies the contract that was
/// broken; the message carries the detail (paths, counts, invariant names).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace avatar
