// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "avatar/weights.hpp"

namespace avatar {

enum class Region : std::uint8_t { Body = 0, Hand = 1, Face = 2 };

/// Parametric body template: canonical surface, UV layout, kinematic tree,
/// skinning weights and linear shape blendshapes. Immutable once loaded.
struct BodyTemplate {
  std::vector<Eigen::Vector3f> vertices;                  // V, meters
  std::vector<std::array<std::uint32_t, 3>> triangles;    // F
  std::vector<std::array<Eigen::Vector2f, 3>> uv_corners; // F x 3 corners, in [0,1]^2
  std::vector<std::int32_t> parents;                      // n_b, root = -1
  std::vector<Eigen::Vector3f> rest_joints;               // n_b, meters
  std::vector<VertexWeights> skin;                        // V
  std::vector<std::vector<Eigen::Vector3f>> blendshapes;  // S x V, meters per unit coefficient
  std::vector<Region> region_labels;                      // F
  std::vector<std::string> joint_names;                   // n_b

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  std::size_t joint_count() const { return parents.size(); }
  std::size_t shape_count() const { return blendshapes.size(); }

  friend bool operator==(const BodyTemplate&, const BodyTemplate&) = default;
};

using ShapeParams = std::vector<double>;

struct Pose {
  Eigen::Vector3d root_translation = Eigen::Vector3d::Zero();
  std::vector<Eigen::Quaterniond> joint_rotations;  // local, relative to rest, (w,x,y,z)

  static Pose identity(std::size_t joints);
};

/// Rest-relative rigid transforms B_i = G_i(pose) * G_i(rest)^-1, one per joint.
struct JointTransforms {
  std::vector<Eigen::Matrix4d> matrices;
};

/// Checks every template invariant; throws InvariantViolation naming the first
/// one that fails.
void validate(const BodyTemplate& tpl);

/// Joint indices ordered so that every parent precedes its children.
std::vector<std::size_t> topological_order(std::span<const std::int32_t> parents);

std::vector<std::uint8_t> encode_template(const BodyTemplate& tpl);
BodyTemplate decode_template(std::span<const std::uint8_t> bytes);
void save_template(const BodyTemplate& tpl, const std::filesystem::path& path);
BodyTemplate load_template(const std::filesystem::path& path);

/// Deterministic capsule-chain humanoid. Joint 0 sits at the origin and the
/// chain runs along +x; a head capsule hangs off the root along +y. The last
/// bone is labelled hand, the head face. Two blendshapes: uniform inflation
/// along the capsule normals and a vertical thickening.
BodyTemplate make_toy_template(int joints, int segments_per_bone, std::uint64_t seed);

/// v = v_base + sum_s beta[s] * S_s.
std::vector<Eigen::Vector3d> apply_shape(const BodyTemplate& tpl, std::span<const double> beta);

/// Template vertices widened to double, i.e. apply_shape with zero beta.
std::vector<Eigen::Vector3d> base_vertices(const BodyTemplate& tpl);

JointTransforms forward_kinematics(const BodyTemplate& tpl, const Pose& pose);

/// Throws InvalidArgument unless the pose has one unit quaternion per joint.
void validate_pose(const BodyTemplate& tpl, const Pose& pose);

}  // namespace avatar
