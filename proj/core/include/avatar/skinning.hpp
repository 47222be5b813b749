// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "avatar/body_template.hpp"
#include "avatar/uv_gaussians.hpp"
#include "avatar/weights.hpp"

namespace avatar {

/// Low-resolution skinning field over the canonical bounding box. Voxel
/// (x, y, z) is stored at (z * gy + y) * gx + x; its weights describe the voxel
/// center.
struct WeightVolume {
  std::array<int, 3> resolution{0, 0, 0};
  Eigen::Vector3d lower = Eigen::Vector3d::Zero();
  Eigen::Vector3d upper = Eigen::Vector3d::Zero();
  std::vector<VertexWeights> voxels;

  Eigen::Vector3d voxel_size() const;
  Eigen::Vector3d voxel_center(int x, int y, int z) const;
  const VertexWeights& at(int x, int y, int z) const;

  friend bool operator==(const WeightVolume&, const WeightVolume&) = default;
};

inline constexpr std::array<int, 3> kDefaultVolumeResolution{64, 64, 64};
inline constexpr int kVolumeNeighbors = 8;

/// Inverse-distance (power 2, k = 8, distance floor 1e-6 m) blend of vertex
/// skin weights at every voxel center, truncated to four influences.
WeightVolume build_weight_volume(const BodyTemplate& tpl, std::span<const Eigen::Vector3d> shaped_vertices,
                                 std::array<int, 3> resolution = kDefaultVolumeResolution);

/// Trilinear interpolation of the field; points outside the bounds are clamped
/// to the nearest in-bounds point.
JointWeights sample_weights(const WeightVolume& volume, const Eigen::Vector3d& point);

/// Body Gaussians read the field at their decoded position; hand and face
/// Gaussians keep their anchor's barycentric template weights.
std::vector<JointWeights> query_weights(const WeightVolume& volume, const AnchorTable& anchors,
                                        const GaussianSet& decoded);

struct SkinningStats {
  double max_orthonormality_residual = 0.0;
};

/// Linear blend skinning: mu' = sum_i w_i B_i mu, R' = polar(T[0:3,0:3] R) with
/// T = sum_i w_i B_i. Scale, color and opacity pass through.
GaussianSet skin_gaussians(const GaussianSet& g, const JointTransforms& transforms,
                           SkinningStats* stats = nullptr);

std::vector<std::uint8_t> encode_volume(const WeightVolume& volume);
WeightVolume decode_volume(std::span<const std::uint8_t> bytes);
void save_volume(const WeightVolume& volume, const std::filesystem::path& path);
WeightVolume load_volume(const std::filesystem::path& path);

/// k nearest points by (squared distance, index); exposed for tests and tools.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Eigen::Vector3d> points);

  /// Indices of the k nearest points, closest first; ties by ascending index.
  std::vector<std::uint32_t> nearest(const Eigen::Vector3d& query, int k) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range into order_
    int axis;                  // -1 for leaves
    double split;
    std::int32_t left, right;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Eigen::Vector3d> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace avatar
