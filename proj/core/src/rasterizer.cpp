// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "avatar/error.hpp"
#include "avatar/parallel.hpp"
#include "avatar/renderer.hpp"

namespace avatar {
namespace {

struct TileGrid {
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<std::uint32_t>> lists;  // front-to-back splat indices per tile
};

TileGrid bin_splats(std::span<const Splat2D> splats, const Camera& camera) {
  TileGrid grid;
  grid.tiles_x = (camera.width + kTileSize - 1) / kTileSize;
  grid.tiles_y = (camera.height + kTileSize - 1) / kTileSize;
  grid.lists.resize(static_cast<std::size_t>(grid.tiles_x) * grid.tiles_y);

  const double max_x = camera.width - 1;
  const double max_y = camera.height - 1;
  for (std::uint32_t idx : depth_order(splats)) {
    const Splat2D& s = splats[idx];
    if (!(s.extent > 0.0)) continue;
    const double x_lo = std::max(0.0, std::ceil(s.mean.x() - s.extent));
    const double x_hi = std::min(max_x, std::floor(s.mean.x() + s.extent));
    const double y_lo = std::max(0.0, std::ceil(s.mean.y() - s.extent));
    const double y_hi = std::min(max_y, std::floor(s.mean.y() + s.extent));
    if (x_lo > x_hi || y_lo > y_hi) continue;
    const int tx0 = static_cast<int>(x_lo) / kTileSize, tx1 = static_cast<int>(x_hi) / kTileSize;
    const int ty0 = static_cast<int>(y_lo) / kTileSize, ty1 = static_cast<int>(y_hi) / kTileSize;
    for (int ty = ty0; ty <= ty1; ++ty) {
      for (int tx = tx0; tx <= tx1; ++tx) grid.lists[static_cast<std::size_t>(ty) * grid.tiles_x + tx].push_back(idx);
    }
  }
  return grid;
}

// Exponent below which alpha * exp(power) is certainly under the 1/255 skip
// threshold, so exp can be skipped without changing which splats composite.
std::vector<double> skip_powers(std::span<const Splat2D> splats) {
  std::vector<double> out(splats.size());
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const double a = splats[i].alpha;
    out[i] = a > 0.0 ? std::log(kMinSplatAlpha / a) - 1e-6 : std::numeric_limits<double>::infinity();
  }
  return out;
}

double splat_power(const Splat2D& s, double px, double py) {
  const double dx = px - s.mean.x();
  const double dy = py - s.mean.y();
  return -0.5 * (s.conic[0] * dx * dx + s.conic[2] * dy * dy) - s.conic[1] * dx * dy;
}

struct Contribution {
  std::uint32_t slot;  // position in the tile list
  double alpha;        // alpha' after clamping
  double transmittance;  // T before this splat
};

}  // namespace

Image Framebuffer::to_image() const {
  Image img;
  img.width = width;
  img.height = height;
  img.rgb.resize(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) img.rgb[i] = static_cast<float>(std::clamp(rgb[i], 0.0, 1.0));
  return img;
}

std::vector<std::uint32_t> depth_order(std::span<const Splat2D> splats) {
  std::vector<std::uint32_t> order(splats.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return splats[a].depth < splats[b].depth; });
  return order;
}

Framebuffer rasterize_framebuffer(std::span<const Splat2D> splats, const Camera& camera,
                                  const Eigen::Vector3d& background) {
  validate(camera);
  const TileGrid grid = bin_splats(splats, camera);
  const std::vector<double> min_power = skip_powers(splats);

  Framebuffer fb;
  fb.width = camera.width;
  fb.height = camera.height;
  const std::size_t pixels = static_cast<std::size_t>(fb.width) * fb.height;
  fb.rgb.assign(pixels * 3, 0.0);
  fb.weight_sum.assign(pixels, 0.0);
  fb.transmittance.assign(pixels, 1.0);

  parallel_for(grid.lists.size(), [&](std::size_t tile) {
    const auto& list = grid.lists[tile];
    const int tx = static_cast<int>(tile % grid.tiles_x);
    const int ty = static_cast<int>(tile / grid.tiles_x);
    const int x_end = std::min(fb.width, (tx + 1) * kTileSize);
    const int y_end = std::min(fb.height, (ty + 1) * kTileSize);
    for (int y = ty * kTileSize; y < y_end; ++y) {
      for (int x = tx * kTileSize; x < x_end; ++x) {
        double t = 1.0;
        double weight = 0.0;
        Eigen::Vector3d color = Eigen::Vector3d::Zero();
        for (std::uint32_t idx : list) {
          const Splat2D& s = splats[idx];
          const double power = splat_power(s, x, y);
          if (power < min_power[idx]) continue;
          const double a = std::min(kMaxSplatAlpha, s.alpha * std::exp(power));
          if (a < kMinSplatAlpha) continue;
          const double w = a * t;
          color += w * s.color;
          weight += w;
          t *= 1.0 - a;
          if (t < kTransmittanceCutoff) break;
        }
        color += t * background;
        const std::size_t p = static_cast<std::size_t>(y) * fb.width + x;
        for (int c = 0; c < 3; ++c) fb.rgb[3 * p + c] = color[c];
        fb.weight_sum[p] = weight;
        fb.transmittance[p] = t;
      }
    }
  });
  return fb;
}

Image rasterize(std::span<const Splat2D> splats, const Camera& camera, const Eigen::Vector3d& background) {
  return rasterize_framebuffer(splats, camera, background).to_image();
}

SplatGradients rasterize_backward(std::span<const Splat2D> splats, const Camera& camera,
                                  const Eigen::Vector3d& background, std::span<const double> dloss_dpixel,
                                  bool with_alpha) {
  validate(camera);
  const std::size_t pixels = static_cast<std::size_t>(camera.width) * camera.height;
  if (dloss_dpixel.size() != pixels * 3) {
    throw Error(ErrorCode::DimensionMismatch, "pixel gradient does not match the camera resolution");
  }
  const TileGrid grid = bin_splats(splats, camera);
  const std::vector<double> min_power = skip_powers(splats);

  std::vector<std::vector<Eigen::Vector3d>> tile_color(grid.lists.size());
  std::vector<std::vector<double>> tile_alpha(grid.lists.size());

  parallel_for(grid.lists.size(), [&](std::size_t tile) {
    const auto& list = grid.lists[tile];
    auto& g_color = tile_color[tile];
    auto& g_alpha = tile_alpha[tile];
    g_color.assign(list.size(), Eigen::Vector3d::Zero());
    if (with_alpha) g_alpha.assign(list.size(), 0.0);

    const int tx = static_cast<int>(tile % grid.tiles_x);
    const int ty = static_cast<int>(tile / grid.tiles_x);
    const int x_end = std::min(camera.width, (tx + 1) * kTileSize);
    const int y_end = std::min(camera.height, (ty + 1) * kTileSize);
    std::vector<Contribution> chain;
    for (int y = ty * kTileSize; y < y_end; ++y) {
      for (int x = tx * kTileSize; x < x_end; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * camera.width + x;
        const Eigen::Vector3d dl_dc(dloss_dpixel[3 * p], dloss_dpixel[3 * p + 1], dloss_dpixel[3 * p + 2]);
        if (dl_dc.isZero(0.0)) continue;

        chain.clear();
        double t = 1.0;
        for (std::uint32_t slot = 0; slot < list.size(); ++slot) {
          const Splat2D& s = splats[list[slot]];
          const double power = splat_power(s, x, y);
          if (power < min_power[list[slot]]) continue;
          const double a = std::min(kMaxSplatAlpha, s.alpha * std::exp(power));
          if (a < kMinSplatAlpha) continue;
          chain.push_back({slot, a, t});
          t *= 1.0 - a;
          if (t < kTransmittanceCutoff) break;
        }

        // Light arriving from behind splat k: later splats plus the background.
        Eigen::Vector3d behind = t * background;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
          const Splat2D& s = splats[list[it->slot]];
          const double w = it->alpha * it->transmittance;
          g_color[it->slot] += w * dl_dc;
          if (with_alpha) {
            const double footprint = std::exp(splat_power(s, x, y));
            if (s.alpha * footprint < kMaxSplatAlpha) {
              const Eigen::Vector3d dc_da = it->transmittance * s.color - behind / (1.0 - it->alpha);
              g_alpha[it->slot] += dl_dc.dot(dc_da) * footprint;
            }
          }
          behind += w * s.color;
        }
      }
    }
  });

  SplatGradients out;
  out.color.assign(splats.size(), Eigen::Vector3d::Zero());
  if (with_alpha) out.alpha.assign(splats.size(), 0.0);
  for (std::size_t tile = 0; tile < grid.lists.size(); ++tile) {
    const auto& list = grid.lists[tile];
    for (std::size_t slot = 0; slot < list.size(); ++slot) {
      out.color[list[slot]] += tile_color[tile][slot];
      if (with_alpha) out.alpha[list[slot]] += tile_alpha[tile][slot];
    }
  }
  return out;
}

}  // namespace avatar
