// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "avatar/avatar.hpp"
#include "avatar/rotation.hpp"
#include "test_support.hpp"

namespace avatar {
namespace {

// Exactly n random Gaussians in front of a 128x128 camera.
testing::RandomScene fixed_scene(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  testing::RandomScene scene;
  scene.camera = testing::front_camera(128, 128, 3.0);
  scene.background = Eigen::Vector3d(0.1, 0.2, 0.3);
  GaussianSet g;
  g.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    g.mu[k] = Eigen::Vector3d(testing::uniform(rng, -0.6, 0.6), testing::uniform(rng, -0.6, 0.6),
                              testing::uniform(rng, -0.8, 0.8));
    g.scale[k] = Eigen::Vector3d::Constant(testing::uniform(rng, 0.005, 0.05));
    g.rot[k] = Eigen::Quaterniond::Identity();
    g.color[k] = Eigen::Vector3d(testing::uniform(rng, 0, 1), testing::uniform(rng, 0, 1), testing::uniform(rng, 0, 1));
    g.alpha[k] = testing::uniform(rng, 0.05, 1.0);
  }
  scene.splats = project(scene.camera, g);
  return scene;
}

void BM_Rasterize(benchmark::State& st) {
  const auto scene = fixed_scene(static_cast<int>(st.range(0)), 1);
  for (auto _ : st) benchmark::DoNotOptimize(rasterize_framebuffer(scene.splats, scene.camera, scene.background));
  st.counters["splats"] = static_cast<double>(scene.splats.size());
}
BENCHMARK(BM_Rasterize)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& st) {
  std::mt19937_64 rng(1);
  const auto scene = testing::random_scene(rng, 500, 64, 64);
  for (auto _ : st) benchmark::DoNotOptimize(brute_force_framebuffer(scene.splats, scene.camera, scene.background));
}
BENCHMARK(BM_BruteForce)->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& st) {
  const auto scene = fixed_scene(2000, 2);
  const std::vector<double> dl(128 * 128 * 3, 1e-3);
  for (auto _ : st) {
    benchmark::DoNotOptimize(rasterize_backward(scene.splats, scene.camera, scene.background, dl, st.range(0) != 0));
  }
}
BENCHMARK(BM_Backward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

const AvatarState& avatar128() {
  static const AvatarState state = testing::toy_avatar(128);
  return state;
}

void BM_Project(benchmark::State& st) {
  const AvatarState& state = avatar128();
  const GaussianSet g = canonical_gaussians(state);
  const Camera cam = testing::front_camera(256, 256, 3.0);
  for (auto _ : st) benchmark::DoNotOptimize(project(cam, g));
  st.counters["gaussians"] = static_cast<double>(g.size());
}
BENCHMARK(BM_Project)->Unit(benchmark::kMillisecond);

void BM_Skin(benchmark::State& st) {
  const AvatarState& state = avatar128();
  const GaussianSet g = canonical_gaussians(state);
  Pose pose = Pose::identity(state.body_template->joint_count());
  pose.joint_rotations[1] = quat_from_euler_xyz_deg(0, 20, 45);
  for (auto _ : st) benchmark::DoNotOptimize(pose_gaussians(*state.body_template, g, pose));
}
BENCHMARK(BM_Skin)->Unit(benchmark::kMillisecond);

void BM_Anchors(benchmark::State& st) {
  const BodyTemplate tpl = make_toy_template(5, 6, 0);
  const auto verts = base_vertices(tpl);
  const int res = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(build_anchor_table(tpl, verts, res, res));
}
BENCHMARK(BM_Anchors)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_RenderAvatar(benchmark::State& st) {
  const AvatarState& state = avatar128();
  const Eigen::Vector3d c = body_center(state);
  const Camera cam = look_at(c + Eigen::Vector3d(0, 0.5, 2.5), c, Eigen::Vector3d::UnitY(),
                             intrinsics_from_focal_mm(35, 256, 256));
  const Pose pose = Pose::identity(state.body_template->joint_count());
  for (auto _ : st) benchmark::DoNotOptimize(render(state, pose, cam, Eigen::Vector3d::Ones()));
}
BENCHMARK(BM_RenderAvatar)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace avatar

BENCHMARK_MAIN();
