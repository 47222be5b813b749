// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "avatar/avatar.hpp"
#include "avatar/editing.hpp"
#include "avatar/fit.hpp"
#include "avatar/rotation.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace avatar;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int scene = 0; scene < 50; ++scene) {
    const auto s = testing::random_scene(rng, 500, 64, 64);
    const Framebuffer tiled = rasterize_framebuffer(s.splats, s.camera, s.background);
    const Framebuffer brute = brute_force_framebuffer(s.splats, s.camera, s.background);
    for (std::size_t i = 0; i < tiled.rgb.size(); ++i) worst = std::max(worst, std::abs(tiled.rgb[i] - brute.rgb[i]));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-5 && secs < 60.0, fmt("50 scenes, max abs diff %.3g (<= 1e-5), %.1f s (< 60 s)", worst, secs)};
}

Outcome compositing_partition() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int scene = 0; scene < 10; ++scene) {
    const auto s = testing::random_scene(rng, 500, 64, 64);
    const Framebuffer fb = rasterize_framebuffer(s.splats, s.camera, s.background);
    for (std::size_t p = 0; p < fb.weight_sum.size(); ++p) {
      worst = std::max(worst, std::abs(fb.weight_sum[p] + fb.transmittance[p] - 1.0));
    }
  }
  return {worst <= 1e-6, fmt("10 scenes, max |sum a'T + T - 1| = %.3g (<= 1e-6)", worst)};
}

const AvatarState& toy(int uv) {
  static std::map<int, AvatarState> cache;
  auto it = cache.find(uv);
  if (it == cache.end()) it = cache.emplace(uv, testing::toy_avatar(uv)).first;
  return it->second;
}

Outcome lbs_fixpoint() {
  const AvatarState& state = toy(128);
  const GaussianSet canonical = canonical_gaussians(state);
  const Pose identity = Pose::identity(state.body_template->joint_count());
  const GaussianSet posed = pose_gaussians(*state.body_template, canonical, identity);
  double worst = 0.0;
  for (std::size_t k = 0; k < canonical.size(); ++k) {
    worst = std::max(worst, (posed.mu[k] - canonical.mu[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (posed.scale[k] - canonical.scale[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (posed.rot[k].coeffs() * (posed.rot[k].dot(canonical.rot[k]) < 0 ? -1.0 : 1.0) -
                             canonical.rot[k].coeffs())
                                .cwiseAbs()
                                .maxCoeff());
  }
  const Eigen::Vector3d c = body_center(state);
  const Camera cam = look_at(c + Eigen::Vector3d(0.4, 0.6, 2.5), c, Eigen::Vector3d::UnitY(),
                             intrinsics_from_focal_mm(35, 96, 96));
  const bool same = render_canonical(state, cam, Eigen::Vector3d::Ones()) ==
                    render(state, identity, cam, Eigen::Vector3d::Ones());
  return {worst <= 1e-7 && same,
          fmt("%zu Gaussians, max param change %.3g (<= 1e-7), images %s", canonical.size(), worst,
              same ? "bitwise equal" : "differ")};
}

Outcome rigid_equivariance() {
  const AvatarState& state = toy(128);
  const Intrinsics k = intrinsics_from_focal_mm(35, 128, 128);
  const Eigen::Vector3d pivot = state.body_template->rest_joints[0].cast<double>();
  const Eigen::Vector3d eye = pivot + Eigen::Vector3d(0.5, 0.4, 2.4);
  const Eigen::Matrix3d half_turn = Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitY()).toRotationMatrix();

  Pose turned = Pose::identity(state.body_template->joint_count());
  turned.joint_rotations[0] = Quat(half_turn);
  const Image a = render(state, turned, look_at(eye, pivot, Eigen::Vector3d::UnitY(), k), Eigen::Vector3d::Zero());
  const Camera orbited = look_at(pivot + half_turn.transpose() * (eye - pivot), pivot, Eigen::Vector3d::UnitY(), k);
  const Image b = render(state, Pose::identity(state.body_template->joint_count()), orbited, Eigen::Vector3d::Zero());
  const double diff = testing::max_abs_diff(a, b);
  return {diff <= 1e-4, fmt("128x128, max abs diff %.3g (<= 1e-4)", diff)};
}

Outcome weight_partition() {
  const auto tpl = std::make_shared<const BodyTemplate>(make_toy_template(5, 6, 0));
  const AvatarState state = make_avatar(tpl, ShapeParams(tpl->shape_count(), 0.0), 512, 512);
  const GaussianSet g = canonical_gaussians(state);
  std::size_t ok = 0;
  double worst = 0.0;
  for (const auto& w : g.weights) {
    const double err = std::abs(w.sum() - 1.0);
    worst = std::max(worst, err);
    ok += err <= 1e-5 ? 1 : 0;
  }
  return {ok == g.size() && !g.weights.empty(),
          fmt("%zu/%zu weight vectors sum to 1 within 1e-5 (worst %.3g)", ok, g.size(), worst)};
}

double framebuffer_loss(std::span<const Splat2D> splats, const testing::RandomScene& s,
                        const std::vector<double>& target) {
  const Framebuffer fb = rasterize_framebuffer(splats, s.camera, s.background);
  double loss = 0.0;
  for (std::size_t i = 0; i < fb.rgb.size(); ++i) loss += (fb.rgb[i] - target[i]) * (fb.rgb[i] - target[i]);
  return loss / static_cast<double>(fb.rgb.size());
}

Outcome gradient_check() {
  std::mt19937_64 rng(4242);
  const auto start = Clock::now();
  std::size_t checked = 0, agree = 0;
  const double eps = 1e-3;
  for (int scene = 0; scene < 20; ++scene) {
    auto s = testing::random_scene(rng, 200, 32, 32);
    std::vector<double> target(32 * 32 * 3);
    for (auto& t : target) t = testing::uniform(rng, 0, 1);
    const Framebuffer fb = rasterize_framebuffer(s.splats, s.camera, s.background);
    std::vector<double> dl(fb.rgb.size());
    for (std::size_t i = 0; i < dl.size(); ++i) dl[i] = 2.0 * (fb.rgb[i] - target[i]) / static_cast<double>(dl.size());
    const SplatGradients g = rasterize_backward(s.splats, s.camera, s.background, dl, false);
    for (std::size_t k = 0; k < s.splats.size(); ++k) {
      for (int c = 0; c < 3; ++c) {
        if (std::abs(g.color[k][c]) <= 1e-8) continue;
        auto plus = s.splats, minus = s.splats;
        plus[k].color[c] += eps;
        minus[k].color[c] -= eps;
        const double fd = (framebuffer_loss(plus, s, target) - framebuffer_loss(minus, s, target)) / (2 * eps);
        ++checked;
        if (std::abs(g.color[k][c] - fd) <= 1e-3 * std::abs(fd)) ++agree;
      }
    }
  }
  const double secs = seconds_since(start);
  const double share = checked == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(checked);
  return {checked > 0 && share >= 0.99 && secs < 300.0,
          fmt("%zu/%zu entries within 1e-3 relative (%.2f%% >= 99%%), %.1f s (< 300 s)", agree, checked, 100 * share,
              secs)};
}

Outcome texture_recovery() {
  const auto start = Clock::now();
  const auto tpl = std::make_shared<const BodyTemplate>(make_toy_template(5, 6, 0));
  const AvatarState base = make_avatar(tpl, ShapeParams(tpl->shape_count(), 0.0), 80, 80);
  AvatarState truth = base;
  truth.maps = paint_pattern(base.maps, TexturePattern::Waves);

  FitConfig cfg;
  cfg.iterations = 200;
  cfg.background = Eigen::Vector3d::Zero();
  const Pose pose = Pose::identity(tpl->joint_count());
  const double radius = 1.1 * body_radius(base) / std::sin(std::atan(18.0 / 35.0));
  for (const auto& cam : make_rig(8, 15.0, radius, body_center(base), intrinsics_from_focal_mm(35, 64, 64))) {
    cfg.views.push_back({cam, render(truth, pose, cam, cfg.background), pose});
  }
  const FitResult r = fit_color(base, cfg);
  const double secs = seconds_since(start);
  const double first = r.trace.loss.front(), last = r.trace.loss.back();
  const double best_psnr = r.trace.psnr.back();
  const bool pass = best_psnr >= 30.0 && last < 0.25 * first && secs < 600.0;
  return {pass, fmt("%zu Gaussians, 8 views 64x64, PSNR %.2f dB (>= 30), loss %.3g -> %.3g (ratio %.2g < 0.25), "
                    "%.1f s (< 600 s)",
                    base.body->anchors.size(), best_psnr, first, last, last / first, secs)};
}

Outcome rig_geometry() {
  const Intrinsics k = intrinsics_from_focal_mm(50, 64, 64);
  bool ok = true;
  std::string detail;
  for (const int n : {24, 72}) {
    const auto az = rig_azimuths(n);
    const double step = 360.0 / n;
    ok = ok && static_cast<int>(az.size()) == n && az.front() == 0.0;
    for (std::size_t i = 1; i < az.size(); ++i) ok = ok && az[i] - az[i - 1] == step;
    const auto rig = make_rig(n, 10.0, 2.5, Eigen::Vector3d(0, 1, 0), k);
    ok = ok && static_cast<int>(rig.size()) == n;
    for (std::size_t i = 0; i < rig.size(); ++i) {
      const Eigen::Vector3d d = rig[i].center() - Eigen::Vector3d(0, 1, 0);
      ok = ok && std::abs(d.norm() - 2.5) < 1e-12;
      const double measured = std::atan2(d.x(), d.z()) * 180.0 / std::numbers::pi;
      double expect = az[i] > 180.0 ? az[i] - 360.0 : az[i];
      ok = ok && std::abs(measured - expect) < 1e-9;
    }
    detail += fmt("make_rig(%d) step %.6g deg; ", n, az[1] - az[0]);
  }
  return {ok, detail + "centers on the orbit"};
}

Outcome anchor_density() {
  const auto tpl = make_toy_template(5, 6, 0);
  const auto table = build_anchor_table(tpl, base_vertices(tpl), 512, 512);
  const double ratio = static_cast<double>(table.size()) / 197000.0;
  return {ratio >= 0.8 && ratio <= 1.2, fmt("%zu anchors at 512x512, %.3f of 197K (0.8 .. 1.2)", table.size(), ratio)};
}

Outcome editing_invariants() {
  const AvatarState& state = toy(96);
  const Eigen::Vector3d c = body_center(state);
  const Camera cam = look_at(c + Eigen::Vector3d(0, 0.5, 2.5), c, Eigen::Vector3d::UnitY(),
                             intrinsics_from_focal_mm(35, 64, 64));
  const Pose pose = Pose::identity(state.body_template->joint_count());
  const Image reference = render(state, pose, cam, Eigen::Vector3d::Ones());

  const AvatarState zero_shape = edit_shape(state, ShapeParams(state.body_template->shape_count(), 0.0));
  const bool shape_noop = render(zero_shape, pose, cam, Eigen::Vector3d::Ones()) == reference;

  TexturePatch clear;
  clear.pixels = {4, 4, std::vector<float>(64, 0.0f)};
  for (std::size_t i = 0; i < 64; i += 4) clear.pixels.rgba[i] = 1.0f;
  const bool patch_noop = edit_texture(state.maps, clear) == state.maps;

  TexturePatch paint;
  paint.pixels = {3, 2, {1, 0, 0, 0.6f, 0, 1, 0, 1, 0, 0, 1, 0.3f, 1, 1, 0, 0.8f, 0, 1, 1, 1, 1, 0, 1, 0.5f}};
  paint.rect = {0.1, 0.2, 0.7, 0.9};
  const ShapeParams beta{0.7, -0.4};
  AvatarState a = edit_shape(state, beta);
  a.maps = edit_texture(a.maps, paint);
  AvatarState b = state;
  b.maps = edit_texture(b.maps, paint);
  b = edit_shape(b, beta);
  const bool commute = a.maps == b.maps && render(a, pose, cam, Eigen::Vector3d::Ones()) ==
                                                render(b, pose, cam, Eigen::Vector3d::Ones());
  return {shape_noop && patch_noop && commute,
          fmt("zero-shape no-op %s, zero-alpha patch no-op %s, shape/texture commute %s", shape_noop ? "yes" : "no",
              patch_noop ? "yes" : "no", commute ? "yes" : "no")};
}

#ifdef AVATAR_CLI_PATH
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "log.txt") files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + AVATAR_CLI_PATH + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "avatar_acceptance_cli";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> runs;
  std::size_t commands = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path d = root / ("run" + std::to_string(pass));
    fs::create_directories(d);
    const std::string D = "\"" + d.string() + "\"";
    const auto p = [&](const char* name) { return "\"" + (d / name).string() + "\""; };
    {
      std::ofstream(d / "poses.json") << R"({"fps": 30, "joint_names": ["root", "joint_1", "joint_2"],
        "frames": [{"root_t": [0, 0, 0], "rot": [[1, 0, 0, 0], [0, 0, 0.6], [1, 0, 0, 0]]},
                   {"root_t": [0, 0.05, 0], "rot": [[1, 0, 0, 0], [0, 0, 1.2], [0, 0.3, 0]]}]})";
      RgbaImage patch{2, 2, {1, 0, 0, 1, 0, 1, 0, 0.5f, 0, 0, 1, 0.25f, 1, 1, 1, 0}};
      const auto png = encode_png(patch);
      std::ofstream(d / "patch.png", std::ios::binary)
          .write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
    }
    const fs::path log = d / "log.txt";
    const std::vector<std::string> cmds = {
        "make-toy --out " + p("toy.btpl") + " --maps-out " + p("toy.gam") + " --uv-res 64 --pattern noise --seed 3" +
            " --volume-out " + p("toy.wvol"),
        "validate --template " + p("toy.btpl") + " --maps " + p("toy.gam") + " --volume " + p("toy.wvol") +
            " --poses " + p("poses.json"),
        "render --template " + p("toy.btpl") + " --maps " + p("toy.gam") + " --pose " + p("poses.json") +
            " --width 48 --height 40 --out " + p("render.png"),
        "turntable --template " + p("toy.btpl") + " --maps " + p("toy.gam") +
            " --views 6 --width 32 --height 32 --out " + p("turn"),
        "animate --template " + p("toy.btpl") + " --maps " + p("toy.gam") + " --poses " + p("poses.json") +
            " --width 32 --height 32 --out " + p("anim"),
        "fit-color --template " + p("toy.btpl") + " --uv-res 64 --views " + p("turn") +
            " --iterations 4 --opacity --out " + p("fit.gam") + " --trace " + p("trace.csv"),
        "edit-shape --template " + p("toy.btpl") + " --maps " + p("toy.gam") +
            " --to 0.5,-0.2 --width 32 --height 32 --out " + p("shape.png") + " --volume-out " + p("shape.wvol"),
        "edit-texture --maps " + p("toy.gam") + " --patch " + p("patch.png") + " --rect 0.2,0.2,0.8,0.6 --out " +
            p("edited.gam"),
    };
    for (const auto& c : cmds) {
      if (run(c, log) != 0) return {false, "command failed: " + c + "\n" + slurp(log)};
    }
    commands = cmds.size();
    runs.push_back(snapshot_dir(d));
  }
  std::size_t differing = 0;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) ++differing;
  }
  const bool ok = differing == 0 && runs[0].size() == runs[1].size();
  fs::remove_all(root);
  return {ok, fmt("%zu commands run twice, %zu artifacts, %zu differ", commands, runs[0].size(),
                  differing)};
}
#endif

}  // namespace

int main() {
  report("oracle-equivalence", oracle_equivalence);
  report("compositing-partition", compositing_partition);
  report("lbs-identity-fixpoint", lbs_fixpoint);
  report("rigid-equivariance", rigid_equivariance);
  report("weight-partition", weight_partition);
  report("gradient-check", gradient_check);
  report("texture-recovery", texture_recovery);
  report("rig-geometry", rig_geometry);
  report("anchor-density", anchor_density);
  report("editing-invariants", editing_invariants);
#ifdef AVATAR_CLI_PATH
  report("cli-determinism", cli_determinism);
#else
  report("cli-determinism", [] { return Outcome{false, "the avatar CLI was not built (AVATAR_BUILD_TOOLS=OFF)"}; });
#endif
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
