// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "avatar/parallel.hpp"
#include "avatar/renderer.hpp"

namespace avatar {

void update_extent(Splat2D& splat) {
  if (!(splat.alpha >= kMinSplatAlpha)) {
    splat.extent = 0.0;
    return;
  }
  // Beyond Mahalanobis radius r, alpha * exp(-r^2 / 2) < 1/255, so the skip test
  // rejects the splat there anyway.
  const double cutoff = std::sqrt(std::max(0.0, 2.0 * std::log(splat.alpha / kMinSplatAlpha)));
  const double sigmas = std::max(kMinExtentSigma, cutoff) * (1.0 + 1e-6);
  const double a = splat.cov(0, 0), b = splat.cov(0, 1), c = splat.cov(1, 1);
  const double mid = 0.5 * (a + c);
  const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - (a * c - b * b)));
  splat.extent = sigmas * std::sqrt(lambda_max) + 1e-6;
}

double splat_alpha(const Splat2D& splat, double px, double py) {
  const double dx = px - splat.mean.x();
  const double dy = py - splat.mean.y();
  const double power = -0.5 * (splat.conic[0] * dx * dx + splat.conic[2] * dy * dy) - splat.conic[1] * dx * dy;
  return std::min(kMaxSplatAlpha, splat.alpha * std::exp(power));
}

std::vector<Splat2D> project(const Camera& camera, const GaussianSet& g, ProjectionStats* stats) {
  validate(camera);
  const Eigen::Matrix3d w = camera.world_to_cam.topLeftCorner<3, 3>();
  const Eigen::Vector3d t = camera.world_to_cam.topRightCorner<3, 1>();

  const std::size_t n = g.size();
  std::vector<Splat2D> all(n);
  std::vector<char> keep(n, 0);
  parallel_for(n, [&](std::size_t k) {
    const Eigen::Vector3d p = w * g.mu[k] + t;
    if (!(p.z() > camera.near) || !p.allFinite()) return;

    const Eigen::Matrix3d r = g.rot[k].toRotationMatrix();
    const Eigen::Matrix3d m = r * g.scale[k].asDiagonal();
    const Eigen::Matrix3d sigma = m * m.transpose();

    const double inv_z = 1.0 / p.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << camera.fx * inv_z, 0.0, -camera.fx * p.x() * inv_z * inv_z,
           0.0, camera.fy * inv_z, -camera.fy * p.y() * inv_z * inv_z;
    const Eigen::Matrix<double, 2, 3> jw = jac * w;
    Eigen::Matrix2d cov = jw * sigma * jw.transpose();
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    cov(0, 0) += kLowPassDilation;
    cov(1, 1) += kLowPassDilation;
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(0, 1);
    if (!(det > 0.0)) return;

    Splat2D& s = all[k];
    s.mean = Eigen::Vector2d(camera.fx * p.x() * inv_z + camera.cx, camera.fy * p.y() * inv_z + camera.cy);
    s.cov = cov;
    s.conic = Eigen::Vector3d(cov(1, 1) / det, -cov(0, 1) / det, cov(0, 0) / det);
    s.depth = p.z();
    s.color = g.color[k];
    s.alpha = g.alpha[k];
    s.source = static_cast<std::uint32_t>(k);
    update_extent(s);
    keep[k] = 1;
  });

  std::vector<Splat2D> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (keep[k]) out.push_back(all[k]);
  }
  if (stats != nullptr) stats->culled = n - out.size();
  return out;
}

}  // namespace avatar
