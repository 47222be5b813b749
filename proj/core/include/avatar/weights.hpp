// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace avatar {

inline constexpr int kMaxInfluences = 4;

/// Up to four (joint, weight) pairs. Unused slots carry weight 0 and joint 0.
template <typename T>
struct Influences {
  std::array<std::uint32_t, kMaxInfluences> joint{};
  std::array<T, kMaxInfluences> weight{};

  T sum() const {
    T s = 0;
    for (T w : weight) s += w;
    return s;
  }

  friend bool operator==(const Influences&, const Influences&) = default;
};

using VertexWeights = Influences<float>;
using JointWeights = Influences<double>;

/// Sparse accumulation of joint weights followed by top-4 truncation and
/// renormalization. Ties in weight are broken by ascending joint index.
class WeightAccumulator {
 public:
  void add(std::uint32_t joint, double weight);
  template <typename T>
  void add(const Influences<T>& w, double scale) {
    for (int i = 0; i < kMaxInfluences; ++i) {
      if (w.weight[i] != T(0)) add(w.joint[i], scale * static_cast<double>(w.weight[i]));
    }
  }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

  /// Top-4 and renormalized. Requires a positive total.
  JointWeights finish() const;

 private:
  std::vector<std::pair<std::uint32_t, double>> entries_;
};

}  // namespace avatar
