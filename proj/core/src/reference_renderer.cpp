// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <tuple>

#include "avatar/renderer.hpp"

namespace avatar {

Framebuffer brute_force_framebuffer(std::span<const Splat2D> splats, const Camera& camera,
                                    const Eigen::Vector3d& background) {
  validate(camera);
  Framebuffer fb;
  fb.width = camera.width;
  fb.height = camera.height;
  const std::size_t pixels = static_cast<std::size_t>(fb.width) * fb.height;
  fb.rgb.assign(pixels * 3, 0.0);
  fb.weight_sum.assign(pixels, 0.0);
  fb.transmittance.assign(pixels, 1.0);

  std::vector<std::tuple<double, std::uint32_t, double>> hits;  // depth, index, alpha'
  for (int y = 0; y < fb.height; ++y) {
    for (int x = 0; x < fb.width; ++x) {
      hits.clear();
      for (std::uint32_t i = 0; i < splats.size(); ++i) {
        const double a = splat_alpha(splats[i], x, y);
        if (a >= kMinSplatAlpha) hits.emplace_back(splats[i].depth, i, a);
      }
      std::sort(hits.begin(), hits.end());

      double t = 1.0;
      double weight = 0.0;
      Eigen::Vector3d color = Eigen::Vector3d::Zero();
      for (const auto& [depth, i, a] : hits) {
        const double w = a * t;
        color += w * splats[i].color;
        weight += w;
        t *= 1.0 - a;
      }
      color += t * background;
      const std::size_t p = static_cast<std::size_t>(y) * fb.width + x;
      for (int c = 0; c < 3; ++c) fb.rgb[3 * p + c] = color[c];
      fb.weight_sum[p] = weight;
      fb.transmittance[p] = t;
    }
  }
  return fb;
}

Image brute_force_render(std::span<const Splat2D> splats, const Camera& camera, const Eigen::Vector3d& background) {
  return brute_force_framebuffer(splats, camera, background).to_image();
}

}  // namespace avatar
