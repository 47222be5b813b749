// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/editing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "avatar/error.hpp"

namespace avatar {
namespace {

Eigen::Vector4d sample_bilinear(const RgbaImage& img, double px, double py) {
  auto texel = [&](int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    const float* p = img.rgba.data() + (static_cast<std::size_t>(y) * img.width + x) * 4;
    return Eigen::Vector4d(p[0], p[1], p[2], p[3]);
  };
  const double fx = px - 0.5, fy = py - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0, ty = fy - y0;
  return (1 - ty) * ((1 - tx) * texel(x0, y0) + tx * texel(x0 + 1, y0)) +
         ty * ((1 - tx) * texel(x0, y0 + 1) + tx * texel(x0 + 1, y0 + 1));
}

Eigen::Vector3f pattern_color(TexturePattern pattern, double u, double v, std::mt19937_64& rng) {
  constexpr double tau = 2.0 * std::numbers::pi;
  switch (pattern) {
    case TexturePattern::Gray:
      return Eigen::Vector3f::Constant(0.5f);
    case TexturePattern::Checker: {
      const bool odd = ((static_cast<int>(std::floor(u * 8.0)) + static_cast<int>(std::floor(v * 8.0))) & 1) != 0;
      return odd ? Eigen::Vector3f(0.85f, 0.3f, 0.2f) : Eigen::Vector3f(0.15f, 0.45f, 0.8f);
    }
    case TexturePattern::Waves:
      return Eigen::Vector3d(0.5 + 0.35 * std::sin(tau * 3.0 * u), 0.5 + 0.35 * std::sin(tau * 2.0 * v + 1.0),
                             0.5 + 0.35 * std::cos(tau * (u + v)))
          .cast<float>();
    case TexturePattern::Noise: {
      Eigen::Vector3f c;
      for (int k = 0; k < 3; ++k) c[k] = static_cast<float>(static_cast<double>(rng() >> 40) * 0x1.0p-24);
      return c;
    }
  }
  return Eigen::Vector3f::Zero();
}

}  // namespace

TexturePattern parse_pattern(std::string_view name) {
  if (name == "gray") return TexturePattern::Gray;
  if (name == "checker") return TexturePattern::Checker;
  if (name == "waves") return TexturePattern::Waves;
  if (name == "noise") return TexturePattern::Noise;
  throw Error(ErrorCode::InvalidArgument, "unknown texture pattern '" + std::string(name) + "'");
}

GaussianAttributeMaps paint_pattern(const GaussianAttributeMaps& maps, TexturePattern pattern, std::uint64_t seed) {
  GaussianAttributeMaps out = maps;
  std::mt19937_64 rng(seed);
  for (int y = 0; y < maps.height; ++y) {
    for (int x = 0; x < maps.width; ++x) {
      const std::size_t t = static_cast<std::size_t>(y) * maps.width + x;
      if (maps.mask[t] == 0) continue;
      const Eigen::Vector3f c = pattern_color(pattern, (x + 0.5) / maps.width, (y + 0.5) / maps.height, rng);
      for (int k = 0; k < 3; ++k) out.color[3 * t + k] = c[k];
    }
  }
  return out;
}

void validate(const TexturePatch& patch) {
  const auto& r = patch.rect;
  const bool in_unit = r.u0 >= 0.0 && r.v0 >= 0.0 && r.u1 <= 1.0 && r.v1 <= 1.0;
  if (!in_unit || !(r.u0 < r.u1) || !(r.v0 < r.v1)) {
    throw Error(ErrorCode::InvalidArgument, "patch rectangle must satisfy 0 <= u0 < u1 <= 1 and 0 <= v0 < v1 <= 1");
  }
  if (patch.pixels.width < 1 || patch.pixels.height < 1 ||
      patch.pixels.rgba.size() != static_cast<std::size_t>(patch.pixels.width) * patch.pixels.height * 4) {
    throw Error(ErrorCode::InvalidArgument, "patch raster is empty or malformed");
  }
  for (std::size_t i = 3; i < patch.pixels.rgba.size(); i += 4) {
    if (!(patch.pixels.rgba[i] >= 0.f && patch.pixels.rgba[i] <= 1.f)) {
      throw Error(ErrorCode::InvalidArgument, "patch alpha outside [0,1]");
    }
  }
}

GaussianAttributeMaps edit_texture(const GaussianAttributeMaps& maps, const TexturePatch& patch) {
  validate(patch);
  GaussianAttributeMaps out = maps;
  const auto& r = patch.rect;
  const int x_lo = std::max(0, static_cast<int>(std::ceil(r.u0 * maps.width - 0.5)));
  const int x_hi = std::min(maps.width - 1, static_cast<int>(std::floor(r.u1 * maps.width - 0.5)));
  const int y_lo = std::max(0, static_cast<int>(std::ceil(r.v0 * maps.height - 0.5)));
  const int y_hi = std::min(maps.height - 1, static_cast<int>(std::floor(r.v1 * maps.height - 0.5)));

  for (int y = y_lo; y <= y_hi; ++y) {
    const double v = (y + 0.5) / maps.height;
    for (int x = x_lo; x <= x_hi; ++x) {
      const double u = (x + 0.5) / maps.width;
      const Eigen::Vector4d s = sample_bilinear(patch.pixels, (u - r.u0) / (r.u1 - r.u0) * patch.pixels.width,
                                                (v - r.v0) / (r.v1 - r.v0) * patch.pixels.height);
      const double a = s[3];
      if (a <= 0.0) continue;
      float* color = out.color.data() + (static_cast<std::size_t>(y) * maps.width + x) * 3;
      for (int c = 0; c < 3; ++c) {
        const double blended = a >= 1.0 ? s[c] : a * s[c] + (1.0 - a) * color[c];
        color[c] = static_cast<float>(std::clamp(blended, 0.0, 1.0));
      }
    }
  }
  return out;
}

AvatarState edit_shape(const AvatarState& state, const ShapeParams& beta) {
  const auto& tpl = *state.body_template;
  if (beta.size() != tpl.shape_count()) {
    throw Error(ErrorCode::LengthMismatch, "shape vector has " + std::to_string(beta.size()) +
                                               " coefficients, template expects " +
                                               std::to_string(tpl.shape_count()));
  }
  AvatarState out = state;
  out.body = build_shaped_body(tpl, beta, state.body->anchors.width, state.body->anchors.height,
                               state.body->volume.resolution);
  return out;
}

void validate(const BodyTemplate& tpl, const PoseSequence& sequence) {
  if (sequence.frames.empty()) throw Error(ErrorCode::InvalidArgument, "pose sequence has no frames");
  if (!(sequence.fps > 0.0)) throw Error(ErrorCode::InvalidArgument, "pose sequence fps must be positive");
  if (!sequence.joint_names.empty() && sequence.joint_names != tpl.joint_names) {
    throw Error(ErrorCode::InvalidArgument, "pose sequence joint order differs from the template");
  }
  for (const auto& pose : sequence.frames) validate_pose(tpl, pose);
}

std::vector<Image> animate(const AvatarState& state, const PoseSequence& sequence, const Camera& camera,
                           const Eigen::Vector3d& background) {
  validate(*state.body_template, sequence);
  const GaussianSet canonical = canonical_gaussians(state);
  std::vector<Image> frames;
  frames.reserve(sequence.frames.size());
  for (const auto& pose : sequence.frames) {
    frames.push_back(render_gaussians(pose_gaussians(*state.body_template, canonical, pose), camera, background));
  }
  return frames;
}

}  // namespace avatar
