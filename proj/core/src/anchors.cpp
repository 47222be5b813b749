// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "avatar/error.hpp"
#include "avatar/parallel.hpp"
#include "avatar/rotation.hpp"
#include "avatar/uv_gaussians.hpp"

namespace avatar {
namespace {

constexpr double kAreaEpsilon = 1e-14;
constexpr double kInsideTolerance = 1e-12;

struct TriangleFrame {
  Eigen::Quaterniond rotation;
  Eigen::Vector3d scale;
};

struct Claim {
  std::int64_t triangle = -1;
  Eigen::Vector3d bary = Eigen::Vector3d::Zero();
};

}  // namespace

AnchorTable build_anchor_table(const BodyTemplate& tpl, std::span<const Eigen::Vector3d> shaped_vertices,
                               int width, int height) {
  if (shaped_vertices.size() != tpl.vertex_count()) {
    throw Error(ErrorCode::LengthMismatch, "shaped vertex count differs from the template");
  }
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "uv resolution must be positive");

  AnchorTable table;
  table.width = width;
  table.height = height;

  const std::size_t F = tpl.triangle_count();
  std::vector<TriangleFrame> frames(F);
  std::vector<Claim> claims(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));

  for (std::size_t f = 0; f < F; ++f) {
    const auto& tri = tpl.triangles[f];
    const Eigen::Vector2d t0 = tpl.uv_corners[f][0].cast<double>();
    const Eigen::Vector2d t1 = tpl.uv_corners[f][1].cast<double>();
    const Eigen::Vector2d t2 = tpl.uv_corners[f][2].cast<double>();
    const Eigen::Vector3d& p0 = shaped_vertices[tri[0]];
    const Eigen::Vector3d e1 = shaped_vertices[tri[1]] - p0;
    const Eigen::Vector3d e2 = shaped_vertices[tri[2]] - p0;

    const Eigen::Vector2d d1 = t1 - t0;
    const Eigen::Vector2d d2 = t2 - t0;
    const double uv_area2 = d1.x() * d2.y() - d2.x() * d1.y();
    if (std::abs(uv_area2) < kAreaEpsilon || e1.cross(e2).norm() < kAreaEpsilon) {
      ++table.degenerate_triangles;
      continue;
    }

    // Solve [e1 e2] = [dP/du dP/dv] [d1 d2].
    const Eigen::Vector3d dp_du = (e1 * d2.y() - e2 * d1.y()) / uv_area2;
    const Eigen::Vector3d dp_dv = (e2 * d1.x() - e1 * d2.x()) / uv_area2;
    const Eigen::Vector3d t = dp_du.normalized();
    const Eigen::Vector3d b_raw = dp_dv - dp_dv.dot(t) * t;
    if (b_raw.norm() < kAreaEpsilon || !t.allFinite()) {
      ++table.degenerate_triangles;
      continue;
    }
    const Eigen::Vector3d b = b_raw.normalized();
    Eigen::Matrix3d frame;
    frame.col(0) = t;
    frame.col(1) = b;
    frame.col(2) = t.cross(b);
    frames[f].rotation = quat_from_matrix(frame, Eigen::Quaterniond::Identity());
    const double e_u = dp_du.norm() / width;
    const double e_v = dp_dv.norm() / height;
    frames[f].scale = Eigen::Vector3d(e_u, e_v, 0.1 * std::min(e_u, e_v));

    const double min_u = std::min({t0.x(), t1.x(), t2.x()});
    const double max_u = std::max({t0.x(), t1.x(), t2.x()});
    const double min_v = std::min({t0.y(), t1.y(), t2.y()});
    const double max_v = std::max({t0.y(), t1.y(), t2.y()});
    const int x_lo = std::max(0, static_cast<int>(std::floor(min_u * width - 0.5)));
    const int x_hi = std::min(width - 1, static_cast<int>(std::ceil(max_u * width - 0.5)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(min_v * height - 0.5)));
    const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(max_v * height - 0.5)));

    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        auto& claim = claims[static_cast<std::size_t>(y) * width + x];
        if (claim.triangle >= 0) continue;
        const Eigen::Vector2d q((x + 0.5) / width, (y + 0.5) / height);
        const Eigen::Vector2d r = q - t0;
        const double l1 = (r.x() * d2.y() - d2.x() * r.y()) / uv_area2;
        const double l2 = (d1.x() * r.y() - r.x() * d1.y()) / uv_area2;
        const double l0 = 1.0 - l1 - l2;
        if (l0 < -kInsideTolerance || l1 < -kInsideTolerance || l2 < -kInsideTolerance) continue;
        Eigen::Vector3d bary(std::max(0.0, l0), std::max(0.0, l1), std::max(0.0, l2));
        bary /= bary.sum();
        claim.triangle = static_cast<std::int64_t>(f);
        claim.bary = bary;
      }
    }
  }

  std::vector<std::uint32_t> texels;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (claims[i].triangle >= 0) texels.push_back(static_cast<std::uint32_t>(i));
  }

  table.anchors.resize(texels.size());
  parallel_for(texels.size(), [&](std::size_t k) {
    const auto& claim = claims[texels[k]];
    const auto f = static_cast<std::size_t>(claim.triangle);
    const auto& tri = tpl.triangles[f];
    Anchor& a = table.anchors[k];
    a.triangle = static_cast<std::uint32_t>(f);
    a.texel = texels[k];
    a.barycentric = claim.bary;
    a.position = claim.bary[0] * shaped_vertices[tri[0]] + claim.bary[1] * shaped_vertices[tri[1]] +
                 claim.bary[2] * shaped_vertices[tri[2]];
    a.scale = frames[f].scale;
    a.rotation = frames[f].rotation;
    a.region = tpl.region_labels[f];
    WeightAccumulator acc;
    for (int c = 0; c < 3; ++c) {
      if (claim.bary[c] > 0.0) acc.add(tpl.skin[tri[c]], claim.bary[c]);
    }
    a.weights = acc.finish();
  });
  return table;
}

}  // namespace avatar
