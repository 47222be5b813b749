// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "avatar/avatar.hpp"
#include "avatar/image.hpp"

namespace avatar {

struct UvRect {
  double u0 = 0.0, v0 = 0.0, u1 = 1.0, v1 = 1.0;
};

/// Straight-alpha RGBA raster placed over a UV rectangle.
struct TexturePatch {
  RgbaImage pixels;
  UvRect rect;
};

void validate(const TexturePatch& patch);

/// Blends the bilinearly resampled patch over every texel whose center lies in
/// the rectangle: color' = a * rgb + (1 - a) * color. Only the color plane changes.
GaussianAttributeMaps edit_texture(const GaussianAttributeMaps& maps, const TexturePatch& patch);

/// Re-anchors the avatar on the template reshaped by `beta`; the attribute maps
/// ride along unchanged.
AvatarState edit_shape(const AvatarState& state, const ShapeParams& beta);

enum class TexturePattern { Gray, Checker, Waves, Noise };

/// "gray", "checker", "waves" or "noise"; throws InvalidArgument otherwise.
TexturePattern parse_pattern(std::string_view name);

/// Writes a procedural color into every valid texel as a function of its UV
/// center. Only Noise reads the seed.
GaussianAttributeMaps paint_pattern(const GaussianAttributeMaps& maps, TexturePattern pattern,
                                    std::uint64_t seed = 0);

struct PoseSequence {
  double fps = 30.0;
  std::vector<std::string> joint_names;
  std::vector<Pose> frames;
};

void validate(const BodyTemplate& tpl, const PoseSequence& sequence);

/// One image per frame. Canonical Gaussians are decoded and weighted once; each
/// frame only runs FK, skinning, projection and rasterization.
std::vector<Image> animate(const AvatarState& state, const PoseSequence& sequence, const Camera& camera,
                           const Eigen::Vector3d& background);

}  // namespace avatar
