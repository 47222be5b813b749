// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/weights.hpp"

#include <algorithm>

#include "avatar/error.hpp"

namespace avatar {

void WeightAccumulator::add(std::uint32_t joint, double weight) {
  for (auto& [j, w] : entries_) {
    if (j == joint) {
      w += weight;
      return;
    }
  }
  entries_.emplace_back(joint, weight);
}

JointWeights WeightAccumulator::finish() const {
  auto sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t keep = std::min<std::size_t>(sorted.size(), kMaxInfluences);
  double total = 0.0;
  for (std::size_t i = 0; i < keep; ++i) total += std::max(0.0, sorted[i].second);
  if (!(total > 0.0)) throw Error(ErrorCode::InvariantViolation, "weight accumulator has no mass");

  JointWeights out;
  for (std::size_t i = 0; i < keep; ++i) {
    out.joint[i] = sorted[i].first;
    out.weight[i] = std::max(0.0, sorted[i].second) / total;
  }
  return out;
}

}  // namespace avatar
