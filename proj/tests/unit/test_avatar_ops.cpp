// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "avatar/avatar.hpp"
#include "avatar/editing.hpp"
#include "avatar/error.hpp"
#include "avatar/pose_io.hpp"
#include "avatar/rotation.hpp"
#include "test_support.hpp"

namespace avatar {
namespace {

const AvatarState& shared_avatar() {
  static const AvatarState state = testing::toy_avatar(64);
  return state;
}

Camera view_of(const AvatarState& state, int size = 48) {
  const Eigen::Vector3d c = body_center(state);
  return look_at(c + Eigen::Vector3d(0, 0.4, 3.0), c, Eigen::Vector3d::UnitY(), intrinsics_from_focal_mm(35, size, size));
}

TexturePatch solid_patch(int w, int h, Eigen::Vector4f rgba, UvRect rect) {
  TexturePatch p;
  p.pixels.width = w;
  p.pixels.height = h;
  for (int i = 0; i < w * h; ++i) p.pixels.rgba.insert(p.pixels.rgba.end(), rgba.data(), rgba.data() + 4);
  p.rect = rect;
  return p;
}

TEST(EditTexture, TransparentPatchChangesNothing) {
  const auto& maps = shared_avatar().maps;
  EXPECT_EQ(edit_texture(maps, solid_patch(7, 5, {1, 0, 0, 0}, {0, 0, 1, 1})), maps);
}

TEST(EditTexture, OpaquePatchOverwritesEveryValidTexel) {
  const auto& maps = shared_avatar().maps;
  const auto out = edit_texture(maps, solid_patch(3, 3, {1, 0, 0, 1}, {0, 0, 1, 1}));
  for (std::size_t t = 0; t < maps.texel_count(); ++t) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(out.color[3 * t + c], c == 0 ? 1.0f : 0.0f);
  }
  EXPECT_EQ(out.opacity, maps.opacity);
  EXPECT_EQ(out.delta_mu, maps.delta_mu);
  EXPECT_EQ(out.delta_s_log, maps.delta_s_log);
  EXPECT_EQ(out.delta_r, maps.delta_r);
  EXPECT_EQ(out.mask, maps.mask);
}

TEST(EditTexture, LeftHalfPatchTouchesOnlyTheLeftColumns) {
  GaussianAttributeMaps maps;
  maps.width = 256;
  maps.height = 4;
  maps.color.assign(256 * 4 * 3, 0.25f);
  maps.opacity.assign(256 * 4, 1.0f);
  maps.mask.assign(256 * 4, 1);
  maps.delta_mu.assign(256 * 4 * 3, 0.0f);
  maps.delta_s_log.assign(256 * 4 * 3, 0.0f);
  maps.delta_r.assign(256 * 4 * 4, 0.0f);
  const auto out = edit_texture(maps, solid_patch(4, 4, {0, 1, 0, 0.5f}, {0, 0, 0.5, 1}));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 256; ++x) {
      const std::size_t t = static_cast<std::size_t>(y) * 256 + x;
      if (x < 128) {
        EXPECT_FLOAT_EQ(out.color[3 * t + 1], 0.625f) << x;
        EXPECT_FLOAT_EQ(out.color[3 * t], 0.125f) << x;
      } else {
        EXPECT_EQ(out.color[3 * t + 1], 0.25f) << x;
      }
    }
  }
}

TEST(EditTexture, RejectsMalformedPatches) {
  const auto& maps = shared_avatar().maps;
  EXPECT_THROW(edit_texture(maps, solid_patch(2, 2, {1, 1, 1, 1}, {0.5, 0, 0.5, 1})), Error);
  EXPECT_THROW(edit_texture(maps, solid_patch(2, 2, {1, 1, 1, 1.5f}, {0, 0, 1, 1})), Error);
  EXPECT_THROW(edit_texture(maps, solid_patch(0, 0, {1, 1, 1, 1}, {0, 0, 1, 1})), Error);
}

TEST(EditShape, ZeroShapeRendersIdentically) {
  const AvatarState& state = shared_avatar();
  const AvatarState same = edit_shape(state, ShapeParams(state.body_template->shape_count(), 0.0));
  const Camera cam = view_of(state);
  const Pose pose = Pose::identity(state.body_template->joint_count());
  EXPECT_EQ(render(same, pose, cam, Eigen::Vector3d::Zero()), render(state, pose, cam, Eigen::Vector3d::Zero()));
  EXPECT_THROW(edit_shape(state, ShapeParams{1.0}), Error);
}

TEST(EditShape, KeepsTheAnchorSetAndCommutesWithTextureEdits) {
  const AvatarState& state = shared_avatar();
  const ShapeParams beta{0.8, -0.5};
  const AvatarState shaped = edit_shape(state, beta);
  ASSERT_EQ(shaped.body->anchors.size(), state.body->anchors.size());
  for (std::size_t k = 0; k < state.body->anchors.size(); ++k) {
    EXPECT_EQ(shaped.body->anchors.anchors[k].texel, state.body->anchors.anchors[k].texel);
  }
  EXPECT_EQ(shaped.maps, state.maps);

  const TexturePatch patch = solid_patch(4, 4, {0.9f, 0.2f, 0.1f, 0.7f}, {0.1, 0.2, 0.6, 0.9});
  AvatarState a = edit_shape(state, beta);
  a.maps = edit_texture(a.maps, patch);
  AvatarState b = state;
  b.maps = edit_texture(b.maps, patch);
  b = edit_shape(b, beta);
  const Camera cam = view_of(state);
  const Pose pose = Pose::identity(state.body_template->joint_count());
  EXPECT_EQ(render(a, pose, cam, Eigen::Vector3d::Zero()), render(b, pose, cam, Eigen::Vector3d::Zero()));
}

int silhouette_area(const Image& img) {
  int n = 0;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) n += img.rgb[3 * p] + img.rgb[3 * p + 1] + img.rgb[3 * p + 2] > 0.3f;
  return n;
}

TEST(EditShape, InflationGrowsTheSilhouette) {
  const AvatarState& state = shared_avatar();
  const Camera cam = view_of(state, 64);
  const Pose pose = Pose::identity(state.body_template->joint_count());
  const int before = silhouette_area(render(state, pose, cam, Eigen::Vector3d::Zero()));
  const int after = silhouette_area(render(edit_shape(state, {1.0, 0.0}), pose, cam, Eigen::Vector3d::Zero()));
  EXPECT_GT(after, before);
}

PoseSequence sequence_of(const AvatarState& state, std::vector<Pose> frames) {
  PoseSequence seq;
  seq.joint_names = state.body_template->joint_names;
  seq.frames = std::move(frames);
  return seq;
}

TEST(Animate, SingleFrameMatchesRender) {
  const AvatarState& state = shared_avatar();
  const Camera cam = view_of(state);
  Pose pose = Pose::identity(state.body_template->joint_count());
  pose.joint_rotations[2] = quat_from_euler_xyz_deg(0, 0, 30);
  const auto frames = animate(state, sequence_of(state, {pose}), cam, Eigen::Vector3d::Ones());
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0], render(state, pose, cam, Eigen::Vector3d::Ones()));
}

TEST(Animate, ConstantSequenceGivesIdenticalFrames) {
  const AvatarState& state = shared_avatar();
  const Pose pose = Pose::identity(state.body_template->joint_count());
  const auto frames = animate(state, sequence_of(state, {pose, pose, pose}), view_of(state), Eigen::Vector3d::Zero());
  EXPECT_EQ(frames[0], frames[1]);
  EXPECT_EQ(frames[1], frames[2]);
}

TEST(Animate, RaisingTheChainMovesTheHandInward) {
  const AvatarState& state = shared_avatar();
  const Camera cam = view_of(state, 64);
  double previous = 1e9;
  for (int deg = 0; deg <= 90; deg += 15) {
    Pose pose = Pose::identity(state.body_template->joint_count());
    pose.joint_rotations[1] = quat_from_euler_xyz_deg(0, 0, deg);
    const GaussianSet posed = posed_gaussians(state, pose);
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    int n = 0;
    const auto splats = project(cam, posed);
    for (const auto& s : splats) {
      if (state.body->anchors.anchors[s.source].region != Region::Hand) continue;
      sum += s.mean;
      ++n;
    }
    ASSERT_GT(n, 0);
    const double x = sum.x() / n;
    EXPECT_LT(x, previous) << deg;
    previous = x;
  }
}

TEST(Animate, RejectsBadSequences) {
  const AvatarState& state = shared_avatar();
  const Camera cam = view_of(state);
  EXPECT_THROW(animate(state, sequence_of(state, {}), cam, Eigen::Vector3d::Zero()), Error);
  PoseSequence wrong = sequence_of(state, {Pose::identity(state.body_template->joint_count())});
  std::swap(wrong.joint_names[1], wrong.joint_names[2]);
  EXPECT_THROW(animate(state, wrong, cam, Eigen::Vector3d::Zero()), Error);
  EXPECT_THROW(animate(state, sequence_of(state, {Pose::identity(2)}), cam, Eigen::Vector3d::Zero()), Error);
}

TEST(PoseIo, ReordersByNameAndReadsAxisAngle) {
  const BodyTemplate& tpl = *shared_avatar().body_template;
  const std::string text = R"({"fps": 24, "joint_names": ["joint_2", "root"],
    "frames": [{"root_t": [0.1, 0.2, 0.3], "rot": [[0, 0, 1.5707963267948966], [1, 0, 0, 0]]}]})";
  const PoseSequence seq = parse_pose_sequence(text, tpl);
  EXPECT_EQ(seq.fps, 24.0);
  EXPECT_EQ(seq.joint_names, tpl.joint_names);
  ASSERT_EQ(seq.frames.size(), 1u);
  const Pose& p = seq.frames[0];
  EXPECT_EQ(p.root_translation, Eigen::Vector3d(0.1, 0.2, 0.3));
  EXPECT_NEAR(p.joint_rotations[2].w(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(p.joint_rotations[2].z(), std::sqrt(0.5), 1e-12);
  EXPECT_TRUE(p.joint_rotations[1].isApprox(Eigen::Quaterniond::Identity()));

  const PoseSequence back = parse_pose_sequence(pose_sequence_to_json(seq), tpl);
  EXPECT_EQ(back.frames[0].root_translation, p.root_translation);
  for (std::size_t j = 0; j < tpl.joint_count(); ++j) {
    EXPECT_TRUE(back.frames[0].joint_rotations[j].isApprox(p.joint_rotations[j], 1e-15));
  }
  EXPECT_THROW(parse_pose_sequence(R"({"joint_names": ["nope"], "frames": [{"rot": [[1,0,0,0]]}]})", tpl), Error);
  EXPECT_THROW(parse_pose_sequence("{not json", tpl), Error);
  EXPECT_THROW(parse_pose(R"({"root_t": [0, 0], "rot": []})", tpl), Error);
}

}  // namespace
}  // namespace avatar
