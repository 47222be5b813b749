// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "avatar/avatar.hpp"
#include "avatar/error.hpp"
#include "avatar/uv_gaussians.hpp"
#include "test_support.hpp"

namespace avatar {
namespace {

AnchorTable quad_anchors(int w, int h) {
  const BodyTemplate tpl = testing::make_quad_template();
  return build_anchor_table(tpl, base_vertices(tpl), w, h);
}

TEST(Anchors, FullCoverageQuadYieldsOneAnchorPerTexel) {
  const AnchorTable table = quad_anchors(4, 4);
  ASSERT_EQ(table.size(), 16u);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const Anchor& a = table.anchors[k];
    EXPECT_EQ(a.texel, k);
    EXPECT_NEAR(a.barycentric.sum(), 1.0, 1e-6);
    EXPECT_GE(a.barycentric.minCoeff(), -1e-6);
    EXPECT_NEAR(a.weights.sum(), 1.0, 1e-5);
  }
}

TEST(Anchors, PositionFrameAndFootprintOnQuad) {
  const AnchorTable table = quad_anchors(4, 8);
  for (const Anchor& a : table.anchors) {
    const int x = static_cast<int>(a.texel % 4), y = static_cast<int>(a.texel / 4);
    EXPECT_NEAR(a.position.x(), (x + 0.5) / 4 - 0.5, 1e-12);
    EXPECT_NEAR(a.position.y(), (y + 0.5) / 8 - 0.5, 1e-12);
    EXPECT_NEAR(a.position.z(), 0.0, 1e-12);
    EXPECT_LT(a.rotation.angularDistance(Eigen::Quaterniond::Identity()), 1e-12);
    EXPECT_NEAR(a.scale.x(), 0.25, 1e-12);
    EXPECT_NEAR(a.scale.y(), 0.125, 1e-12);
    EXPECT_NEAR(a.scale.z(), 0.0125, 1e-12);
  }
}

TEST(Anchors, SharedTexelsGoToLowestTriangleIndex) {
  const AnchorTable table = quad_anchors(4, 4);
  for (const Anchor& a : table.anchors) {
    const int x = static_cast<int>(a.texel % 4), y = static_cast<int>(a.texel / 4);
    if (x == y) EXPECT_EQ(a.triangle, 0u) << "diagonal texel " << a.texel;
    if (x > y) EXPECT_EQ(a.triangle, 0u);
    if (x < y) EXPECT_EQ(a.triangle, 1u);
  }
}

TEST(Anchors, DegenerateTrianglesAreSkippedAndCounted) {
  BodyTemplate tpl = testing::make_quad_template();
  tpl.triangles.push_back({0, 1, 1});
  tpl.uv_corners.push_back(tpl.uv_corners[0]);
  tpl.region_labels.push_back(Region::Body);
  const AnchorTable table = build_anchor_table(tpl, base_vertices(tpl), 4, 4);
  EXPECT_EQ(table.degenerate_triangles, 1u);
  EXPECT_EQ(table.size(), 16u);
}

// Oracle: brute-force texel-center-in-any-triangle test over the UV atlas.
TEST(Anchors, ToyCountMatchesBruteForceCoverage) {
  const BodyTemplate tpl = make_toy_template(5, 6, 0);
  const int res = 96;
  const AnchorTable table = build_anchor_table(tpl, base_vertices(tpl), res, res);
  std::size_t covered = 0;
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const Eigen::Vector2d p((x + 0.5) / res, (y + 0.5) / res);
      for (std::size_t f = 0; f < tpl.triangle_count(); ++f) {
        const Eigen::Vector2d a = tpl.uv_corners[f][0].cast<double>(), b = tpl.uv_corners[f][1].cast<double>(),
                              c = tpl.uv_corners[f][2].cast<double>();
        auto edge = [](const Eigen::Vector2d& p0, const Eigen::Vector2d& p1, const Eigen::Vector2d& q) {
          return (p1.x() - p0.x()) * (q.y() - p0.y()) - (p1.y() - p0.y()) * (q.x() - p0.x());
        };
        const double area = edge(a, b, c);
        if (std::abs(area) < 1e-14) continue;
        const double w0 = edge(b, c, p) / area, w1 = edge(c, a, p) / area, w2 = edge(a, b, p) / area;
        if (w0 >= -1e-9 && w1 >= -1e-9 && w2 >= -1e-9) {
          ++covered;
          break;
        }
      }
    }
  }
  EXPECT_EQ(table.size(), covered);
}

TEST(Anchors, CountAt512IsNearThreeQuartersOfTheAtlas) {
  const BodyTemplate tpl = make_toy_template(5, 6, 0);
  const AnchorTable table = build_anchor_table(tpl, base_vertices(tpl), 512, 512);
  const auto maps = default_maps(table, Eigen::Vector3f::Constant(0.5f));
  EXPECT_EQ(table.size(), maps.valid_count());
  EXPECT_NEAR(static_cast<double>(table.size()), 196608.0, 0.2 * 196608.0);
  for (std::size_t k = 1; k < table.size(); ++k) EXPECT_LT(table.anchors[k - 1].texel, table.anchors[k].texel);
}

TEST(Anchors, AreDeterministic) {
  const BodyTemplate tpl = make_toy_template(3, 4, 1);
  const AnchorTable a = build_anchor_table(tpl, base_vertices(tpl), 64, 64);
  const AnchorTable b = build_anchor_table(tpl, base_vertices(tpl), 64, 64);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.anchors[k].position, b.anchors[k].position);
    EXPECT_EQ(a.anchors[k].rotation.coeffs(), b.anchors[k].rotation.coeffs());
    EXPECT_EQ(a.anchors[k].weights, b.anchors[k].weights);
  }
}

TEST(Decode, IdentityOffsetsReproduceAnchors) {
  const BodyTemplate tpl = make_toy_template(3, 4, 0);
  const AnchorTable table = build_anchor_table(tpl, base_vertices(tpl), 48, 48);
  const GaussianSet g = decode_gaussians(table, default_maps(table, Eigen::Vector3f(0.5f, 0.5f, 0.5f)));
  ASSERT_EQ(g.size(), table.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Anchor& a = table.anchors[k];
    EXPECT_EQ(g.mu[k], a.position);
    EXPECT_EQ(g.scale[k], a.scale);
    EXPECT_LT((g.rot[k].coeffs() - a.rotation.coeffs()).norm(), 1e-12);
    EXPECT_EQ(g.color[k], Eigen::Vector3d(0.5, 0.5, 0.5));
    EXPECT_EQ(g.alpha[k], 1.0);
  }
}

TEST(Decode, LogScaleDoublesOneAxis) {
  const AnchorTable table = quad_anchors(4, 4);
  GaussianAttributeMaps maps = default_maps(table, Eigen::Vector3f::Constant(0.5f));
  maps.delta_s_log[3 * 5] = static_cast<float>(std::log(2.0));
  const GaussianSet g = decode_gaussians(table, maps);
  EXPECT_NEAR(g.scale[5].x(), 2.0 * table.anchors[5].scale.x(), 1e-7);
  EXPECT_EQ(g.scale[5].y(), table.anchors[5].scale.y());
  EXPECT_EQ(g.scale[5].z(), table.anchors[5].scale.z());
  EXPECT_EQ(g.scale[4], table.anchors[4].scale);
}

TEST(Decode, OffsetsAndRotationComposeOnTheRight) {
  const AnchorTable table = quad_anchors(2, 2);
  GaussianAttributeMaps maps = default_maps(table, Eigen::Vector3f::Constant(0.5f));
  maps.delta_mu[0] = 0.25f;
  const Eigen::Quaterniond dr(Eigen::AngleAxisd(0.5, Eigen::Vector3d::UnitX()));
  for (int c = 0; c < 4; ++c) maps.delta_r[4 + c] = static_cast<float>(c == 0 ? dr.w() : dr.vec()[c - 1]);
  const GaussianSet g = decode_gaussians(table, maps);
  EXPECT_NEAR(g.mu[0].x(), table.anchors[0].position.x() + 0.25, 1e-7);
  const Eigen::Quaterniond expected = (table.anchors[1].rotation * dr).normalized();
  EXPECT_LT(g.rot[1].angularDistance(expected), 1e-6);
  for (const auto& q : g.rot) EXPECT_NEAR(q.norm(), 1.0, 1e-12);
}

TEST(Decode, ResolutionMismatchIsReported) {
  const AnchorTable table = quad_anchors(4, 4);
  const auto maps = default_maps(quad_anchors(8, 8), Eigen::Vector3f::Constant(0.5f));
  try {
    decode_gaussians(table, maps);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResolutionMismatch);
  }
}

TEST(Decode, EditingOneTexelChangesExactlyOneGaussian) {
  const BodyTemplate tpl = make_toy_template(3, 4, 0);
  const AnchorTable table = build_anchor_table(tpl, base_vertices(tpl), 32, 32);
  const auto maps = default_maps(table, Eigen::Vector3f::Constant(0.5f));
  const GaussianSet before = decode_gaussians(table, maps);
  const std::size_t pick = table.anchors[table.size() / 2].texel;
  auto edited = maps;
  edited.color[3 * pick] = 0.9f;
  const GaussianSet after = decode_gaussians(table, edited);
  int changed = 0;
  for (std::size_t k = 0; k < before.size(); ++k) changed += before.color[k] != after.color[k] ? 1 : 0;
  EXPECT_EQ(changed, 1);
}

TEST(DefaultMaps, AreGrayAndOpaque) {
  const AnchorTable table = quad_anchors(4, 4);
  const auto maps = default_maps(table, Eigen::Vector3f(0.5f, 0.5f, 0.5f));
  for (float o : maps.opacity) EXPECT_EQ(o, 1.f);
  EXPECT_EQ(maps.valid_count(), 16u);
  const AnchorTable empty{3, 3, {}, 0};
  EXPECT_EQ(default_maps(empty, Eigen::Vector3f::Zero()).valid_count(), 0u);
}

TEST(MapFile, RoundTripIsBitwise) {
  const AnchorTable table = quad_anchors(5, 3);
  auto maps = default_maps(table, Eigen::Vector3f(0.1f, 0.2f, 0.3f));
  for (std::size_t i = 0; i < maps.delta_mu.size(); ++i) maps.delta_mu[i] = 0.001f * static_cast<float>(i);
  maps.opacity[2] = 0.25f;
  MapLoadReport report;
  const auto back = decode_maps(encode_maps(maps), &report);
  EXPECT_EQ(back, maps);
  EXPECT_EQ(report.color_clamped + report.opacity_clamped + report.rotations_normalized, 0u);
}

TEST(MapFile, OutOfRangeColorIsClampedAndCounted) {
  auto maps = default_maps(quad_anchors(2, 2), Eigen::Vector3f::Constant(0.5f));
  maps.color[4] = 1.5f;
  maps.delta_r[4] = 2.f;
  MapLoadReport report;
  const auto back = decode_maps(encode_maps(maps), &report);
  EXPECT_EQ(back.color[4], 1.f);
  EXPECT_EQ(report.color_clamped, 1u);
  EXPECT_EQ(report.rotations_normalized, 1u);
  EXPECT_EQ(back.delta_r[4], 1.f);
}

TEST(MapFile, TruncatedPlaneIsPlaneSizeMismatch) {
  auto bytes = encode_maps(default_maps(quad_anchors(4, 4), Eigen::Vector3f::Constant(0.5f)));
  bytes.pop_back();
  try {
    decode_maps(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PlaneSizeMismatch);
  }
  auto maps = default_maps(quad_anchors(4, 4), Eigen::Vector3f::Constant(0.5f));
  maps.opacity.pop_back();
  EXPECT_THROW(encode_maps(maps), Error);
}

TEST(MapFile, WrongMagicIsRejected) {
  auto bytes = encode_maps(default_maps(quad_anchors(2, 2), Eigen::Vector3f::Constant(0.5f)));
  bytes[2] = 'Z';
  try {
    decode_maps(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadMagic);
  }
}

}  // namespace
}  // namespace avatar
