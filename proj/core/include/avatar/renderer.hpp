// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "avatar/camera.hpp"
#include "avatar/image.hpp"
#include "avatar/uv_gaussians.hpp"

namespace avatar {

inline constexpr double kLowPassDilation = 0.3;        // pixels^2 added to cov2d
inline constexpr double kMaxSplatAlpha = 0.99;
inline constexpr double kMinSplatAlpha = 1.0 / 255.0;
inline constexpr double kTransmittanceCutoff = 1e-5;
inline constexpr int kTileSize = 16;
inline constexpr double kMinExtentSigma = 3.0;

/// Screen-space Gaussian. `conic` holds the upper triangle (a, b, c) of cov2d^-1.
struct Splat2D {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  Eigen::Vector3d conic = Eigen::Vector3d(1.0, 0.0, 1.0);
  double depth = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double alpha = 0.0;
  double extent = 0.0;       // half-width of the screen bound in pixels, 0 if never visible
  std::uint32_t source = 0;  // index of the Gaussian it came from
};

struct ProjectionStats {
  std::size_t culled = 0;
};

/// EWA projection: cov2d = J W Sigma W^T J^T + 0.3 I with Sigma = R diag(s)^2 R^T.
/// Gaussians at or in front of the near plane are dropped; order is preserved.
std::vector<Splat2D> project(const Camera& camera, const GaussianSet& g, ProjectionStats* stats = nullptr);

/// Recomputes the screen bound after the splat's opacity changed: the larger of
/// 3 sigma and the radius where alpha * G falls below 1/255.
void update_extent(Splat2D& splat);

/// Opacity of a splat at pixel (px, py) after the 0.99 clamp, before the skip test.
double splat_alpha(const Splat2D& splat, double px, double py);

/// Double-precision compositing result.
struct Framebuffer {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;            // 3 per pixel
  std::vector<double> weight_sum;     // sum of alpha' T over composited splats
  std::vector<double> transmittance;  // T left for the background

  Image to_image() const;  // clamped to [0,1]
};

/// Splat indices ordered front to back; equal depths keep input order.
std::vector<std::uint32_t> depth_order(std::span<const Splat2D> splats);

/// Tile-based front-to-back compositing (16x16 tiles, early termination).
Framebuffer rasterize_framebuffer(std::span<const Splat2D> splats, const Camera& camera,
                                  const Eigen::Vector3d& background);
Image rasterize(std::span<const Splat2D> splats, const Camera& camera, const Eigen::Vector3d& background);

/// Reference: every splat visited at every pixel, per-pixel sort, no tiles, no
/// screen bound, no early termination.
Framebuffer brute_force_framebuffer(std::span<const Splat2D> splats, const Camera& camera,
                                    const Eigen::Vector3d& background);
Image brute_force_render(std::span<const Splat2D> splats, const Camera& camera, const Eigen::Vector3d& background);

/// Per-splat gradients of a scalar loss given dL/dC for every pixel (3 per pixel).
struct SplatGradients {
  std::vector<Eigen::Vector3d> color;
  std::vector<double> alpha;  // empty unless requested
};

/// Replays tiled compositing and back-propagates dL/dC to splat colors and,
/// optionally, opacities. Clamped (0.99) and skipped (< 1/255) contributions have
/// zero opacity gradient. Accumulation order is fixed, so results do not depend
/// on the worker count.
SplatGradients rasterize_backward(std::span<const Splat2D> splats, const Camera& camera,
                                  const Eigen::Vector3d& background, std::span<const double> dloss_dpixel,
                                  bool with_alpha);

}  // namespace avatar
