// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "avatar/error.hpp"

namespace avatar::app {

AvatarState load_avatar(const std::filesystem::path& template_path,
                        const std::optional<std::filesystem::path>& maps_path, int uv_resolution,
                        const ShapeParams& beta) {
  auto tpl = std::make_shared<const BodyTemplate>(load_template(template_path));
  ShapeParams shape = beta.empty() ? ShapeParams(tpl->shape_count(), 0.0) : beta;
  if (shape.size() != tpl->shape_count()) {
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(tpl->shape_count()) +
                                                " shape coefficients, got " + std::to_string(shape.size()));
  }
  if (maps_path) {
    GaussianAttributeMaps maps = load_maps(*maps_path);
    const int w = maps.width, h = maps.height;
    AvatarState state = make_avatar(std::move(tpl), shape, w, h, std::move(maps));
    decode_gaussians(state.body->anchors, state.maps);
    return state;
  }
  if (uv_resolution < 1) throw Error(ErrorCode::InvalidArgument, "UV resolution must be positive");
  return make_avatar(std::move(tpl), shape, uv_resolution, uv_resolution);
}

Camera default_camera(const AvatarState& state, int width, int height) {
  const Intrinsics k = intrinsics_from_focal_mm(kDefaultFocalMm, width, height);
  const double half_tan = std::min((width * 0.5) / k.fx, (height * 0.5) / k.fy);
  const double radius = std::max(body_radius(state), 1e-3);
  const double distance = 1.1 * radius / std::sin(std::atan(half_tan));
  const Eigen::Vector3d center = body_center(state);
  return look_at(center + Eigen::Vector3d(0.0, 0.0, distance), center, Eigen::Vector3d::UnitY(), k);
}

std::vector<Camera> orbit_cameras(const AvatarState& state, const Camera& base, int n_views) {
  const Eigen::Vector3d center = body_center(state);
  const Eigen::Vector3d offset = base.center() - center;
  const double radius = offset.norm();
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "camera sits at the body center");
  const double elevation = std::asin(std::clamp(offset.y() / radius, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  Intrinsics k;
  k.fx = base.fx;
  k.fy = base.fy;
  k.cx = base.cx;
  k.cy = base.cy;
  k.width = base.width;
  k.height = base.height;
  k.near = base.near;
  return make_rig(n_views, elevation, radius, center, k);
}

}  // namespace avatar::app
