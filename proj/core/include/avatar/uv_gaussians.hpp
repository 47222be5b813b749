// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "avatar/body_template.hpp"
#include "avatar/weights.hpp"

namespace avatar {

/// Surface anchor of one valid UV texel: the point, footprint and tangent frame
/// relative to which the texel's Gaussian is expressed.
struct Anchor {
  std::uint32_t triangle = 0;
  std::uint32_t texel = 0;  // row-major texel index, y * width + x
  Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // meters
  Eigen::Vector3d scale = Eigen::Vector3d::Zero();     // meters
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Region region = Region::Body;
  JointWeights weights;
};

struct AnchorTable {
  int width = 0;
  int height = 0;
  std::vector<Anchor> anchors;           // ascending texel order
  std::size_t degenerate_triangles = 0;  // skipped for zero UV or world area

  std::size_t size() const { return anchors.size(); }
};

/// Rasterizes every template triangle in UV space (texel-center coverage, lowest
/// triangle index wins) and builds one anchor per covered texel.
AnchorTable build_anchor_table(const BodyTemplate& tpl, std::span<const Eigen::Vector3d> shaped_vertices,
                               int width, int height);

/// Per-texel Gaussian attributes. Multi-channel planes are texel-major: channel c
/// of texel t lives at plane[t * channels + c].
struct GaussianAttributeMaps {
  int width = 0;
  int height = 0;
  std::vector<float> delta_mu;     // 3, meters, world axes
  std::vector<float> delta_s_log;  // 3, log of the multiplicative scale factor
  std::vector<float> delta_r;      // 4, unit quaternion (w, x, y, z)
  std::vector<float> color;        // 3, linear RGB in [0,1]
  std::vector<float> opacity;      // 1, [0,1]
  std::vector<std::uint8_t> mask;  // 1, 1 = valid texel

  std::size_t texel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::size_t valid_count() const;

  friend bool operator==(const GaussianAttributeMaps&, const GaussianAttributeMaps&) = default;
};

struct MapLoadReport {
  std::size_t color_clamped = 0;
  std::size_t opacity_clamped = 0;
  std::size_t rotations_normalized = 0;
};

/// Identity offsets, uniform color, opacity 1; mask from the anchors.
GaussianAttributeMaps default_maps(const AnchorTable& anchors, const Eigen::Vector3f& base_color);

/// Normalizes delta_r on valid texels and clamps color/opacity into [0,1].
MapLoadReport sanitize_maps(GaussianAttributeMaps& maps);

std::vector<std::uint8_t> encode_maps(const GaussianAttributeMaps& maps);
GaussianAttributeMaps decode_maps(std::span<const std::uint8_t> bytes, MapLoadReport* report = nullptr);
void save_maps(const GaussianAttributeMaps& maps, const std::filesystem::path& path);
GaussianAttributeMaps load_maps(const std::filesystem::path& path, MapLoadReport* report = nullptr);

/// Decoded primitives, structure-of-arrays. Gaussian k comes from anchor k.
struct GaussianSet {
  std::vector<Eigen::Vector3d> mu;
  std::vector<Eigen::Vector3d> scale;
  std::vector<Eigen::Quaterniond> rot;
  std::vector<Eigen::Vector3d> color;
  std::vector<double> alpha;
  std::vector<JointWeights> weights;

  std::size_t size() const { return mu.size(); }
  void resize(std::size_t n);
};

/// mu = mu_hat + d_mu, s = s_hat * exp(d_s_log), r = r_hat (x) d_r, color and
/// opacity copied from the texel, weights copied from the anchor.
GaussianSet decode_gaussians(const AnchorTable& anchors, const GaussianAttributeMaps& maps);

}  // namespace avatar
