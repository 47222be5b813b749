// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "avatar/avatar.hpp"
#include "avatar/camera.hpp"

namespace avatar::app {

inline constexpr double kDefaultFocalMm = 50.0;

/// Template plus optional maps; without maps the avatar is neutral gray at
/// `uv_resolution`. An empty beta means the zero shape.
AvatarState load_avatar(const std::filesystem::path& template_path,
                        const std::optional<std::filesystem::path>& maps_path, int uv_resolution,
                        const ShapeParams& beta);

/// Front view (+z) that frames the whole shaped body.
Camera default_camera(const AvatarState& state, int width, int height);

/// Evenly spaced orbit through `base`: same radius, elevation and intrinsics,
/// azimuths k * 360 / n around the body center.
std::vector<Camera> orbit_cameras(const AvatarState& state, const Camera& base, int n_views);

}  // namespace avatar::app
