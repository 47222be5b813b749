// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <memory>
#include <optional>

#include <Eigen/Core>

#include "avatar/body_template.hpp"
#include "avatar/camera.hpp"
#include "avatar/image.hpp"
#include "avatar/renderer.hpp"
#include "avatar/skinning.hpp"
#include "avatar/uv_gaussians.hpp"

namespace avatar {

inline constexpr int kDefaultUvResolution = 256;

/// Everything derived from the template surface at one shape: shaped vertices,
/// the UV anchor table and the skinning field. Immutable.
struct ShapedBody {
  ShapeParams beta;
  std::vector<Eigen::Vector3d> vertices;
  AnchorTable anchors;
  WeightVolume volume;
};

std::shared_ptr<const ShapedBody> build_shaped_body(const BodyTemplate& tpl, const ShapeParams& beta, int uv_width,
                                                    int uv_height,
                                                    std::array<int, 3> volume_resolution = kDefaultVolumeResolution);

/// Renderable avatar snapshot. Copies share the immutable template and shaped
/// body; the attribute maps are owned by value.
struct AvatarState {
  std::shared_ptr<const BodyTemplate> body_template;
  std::shared_ptr<const ShapedBody> body;
  GaussianAttributeMaps maps;
};

/// Builds the shaped body at `beta` and pairs it with `maps`, or neutral gray maps
/// when none are given.
AvatarState make_avatar(std::shared_ptr<const BodyTemplate> tpl, const ShapeParams& beta, int uv_width,
                        int uv_height, std::optional<GaussianAttributeMaps> maps = std::nullopt,
                        std::array<int, 3> volume_resolution = kDefaultVolumeResolution);

/// Decoded Gaussians in canonical space with their final skin weights.
GaussianSet canonical_gaussians(const AvatarState& state);

/// FK + LBS of precomputed canonical Gaussians.
GaussianSet pose_gaussians(const BodyTemplate& tpl, const GaussianSet& canonical, const Pose& pose,
                           SkinningStats* stats = nullptr);

GaussianSet posed_gaussians(const AvatarState& state, const Pose& pose);

/// decode -> query weights -> FK -> skin -> project -> rasterize.
Image render(const AvatarState& state, const Pose& pose, const Camera& camera, const Eigen::Vector3d& background);

/// Renders canonical Gaussians without skinning.
Image render_canonical(const AvatarState& state, const Camera& camera, const Eigen::Vector3d& background);

Image render_gaussians(const GaussianSet& g, const Camera& camera, const Eigen::Vector3d& background);

/// Center of the axis-aligned bounds of the shaped surface.
Eigen::Vector3d body_center(const AvatarState& state);
double body_radius(const AvatarState& state);

}  // namespace avatar
