// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "avatar/body_template.hpp"
#include "avatar/camera.hpp"
#include "avatar/image.hpp"
#include "avatar/pose_io.hpp"
#include "avatar/uv_gaussians.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;

namespace avatar::app {
namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::uint8_t> bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::path(::testing::TempDir()) / "avatar_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const CliRun r = cli({"make-toy", "--out", (dir_ / "toy.btpl").string(), "--maps-out", (dir_ / "toy.gam").string(),
                       "--uv-res", "48", "--pattern", "waves", "--volume-out", (dir_ / "toy.wvol").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static fs::path dir_;
  fs::path tpl() const { return dir_ / "toy.btpl"; }
  fs::path maps() const { return dir_ / "toy.gam"; }
};
fs::path CliTest::dir_;

TEST_F(CliTest, ValidateAcceptsGeneratedAssets) {
  const CliRun r = cli({"validate", "--template", tpl().string(), "--maps", maps().string(), "--volume",
                     (dir_ / "toy.wvol").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("template ok"), std::string::npos);
  EXPECT_NE(r.out.find("anchors="), std::string::npos);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
}

TEST_F(CliTest, ValidateNamesTheMissingFile) {
  const std::string missing = (dir_ / "nowhere.cam.json").string();
  const CliRun r = cli({"validate", "--template", tpl().string(), "--camera", missing});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST_F(CliTest, RenderNamesTheMissingCamera) {
  const std::string missing = (dir_ / "absent.cam.json").string();
  const CliRun r = cli({"render", "--template", tpl().string(), "--camera", missing, "--out", (dir_ / "never.png").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "never.png"));
}

TEST_F(CliTest, ValidateRejectsACorruptTemplate) {
  auto bytes = bytes_of(tpl());
  bytes[0] = 'X';
  const fs::path bad = dir_ / "bad.btpl";
  std::ofstream(bad, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  const CliRun r = cli({"validate", "--template", bad.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("invalid"), std::string::npos);
}

TEST_F(CliTest, RenderIsByteDeterministic) {
  const fs::path a = dir_ / "a.png", b = dir_ / "b.png";
  for (const auto& p : {a, b}) {
    const CliRun r = cli({"render", "--template", tpl().string(), "--maps", maps().string(), "--width", "40", "--height",
                       "32", "--out", p.string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(bytes_of(a), bytes_of(b));
  const Image img = load_png(a);
  EXPECT_EQ(img.width, 40);
  EXPECT_EQ(img.height, 32);
}

TEST_F(CliTest, TurntableWritesTwentyFourNamedViews) {
  const fs::path out = dir_ / "turn";
  const CliRun r = cli({"turntable", "--template", tpl().string(), "--maps", maps().string(), "--width", "16",
                     "--height", "16", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(out)) pngs += e.path().extension() == ".png";
  EXPECT_EQ(pngs, 24u);
  for (int k = 0; k < 24; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%03d", k);
    EXPECT_TRUE(fs::exists(out / (std::string(name) + ".png"))) << name;
    EXPECT_TRUE(fs::exists(out / (std::string(name) + ".cam.json"))) << name;
  }
  std::ifstream c0(out / "view_000.cam.json"), c6(out / "view_006.cam.json");
  std::stringstream s0, s6;
  s0 << c0.rdbuf();
  s6 << c6.rdbuf();
  const Camera cam0 = camera_from_json(s0.str()), cam6 = camera_from_json(s6.str());
  const Eigen::Vector3d f0 = cam0.world_to_cam.block<1, 3>(2, 0).transpose();
  const Eigen::Vector3d f6 = cam6.world_to_cam.block<1, 3>(2, 0).transpose();
  EXPECT_NEAR(f0.dot(f6), 0.0, 1e-9);
}

TEST_F(CliTest, FitColorWritesMapsAndTrace) {
  const fs::path views = dir_ / "fitviews";
  ASSERT_EQ(cli({"turntable", "--template", tpl().string(), "--maps", maps().string(), "--views", "3", "--width", "16",
                 "--height", "16", "--out", views.string()})
                .code,
            0);
  const CliRun r = cli({"fit-color", "--template", tpl().string(), "--uv-res", "48", "--views", views.string(),
                     "--iterations", "3", "--out", (dir_ / "fit.gam").string(), "--trace",
                     (dir_ / "trace.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fitted = load_maps(dir_ / "fit.gam");
  EXPECT_EQ(fitted.width, 48);
  std::ifstream trace(dir_ / "trace.csv");
  std::string line;
  int rows = 0;
  std::getline(trace, line);
  EXPECT_EQ(line, "iter,loss,psnr");
  while (std::getline(trace, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST_F(CliTest, AnimateWritesOneFramePerPose) {
  const auto t = load_template(tpl());
  PoseSequence seq;
  seq.joint_names = t.joint_names;
  seq.frames.assign(3, Pose::identity(t.joint_count()));
  save_pose_sequence(seq, dir_ / "poses.json");
  const CliRun r = cli({"animate", "--template", tpl().string(), "--poses", (dir_ / "poses.json").string(), "--width",
                     "16", "--height", "16", "--out", (dir_ / "anim").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"frame_0000.png", "frame_0001.png", "frame_0002.png"}) EXPECT_TRUE(fs::exists(dir_ / "anim" / f));
  EXPECT_EQ(bytes_of(dir_ / "anim" / "frame_0000.png"), bytes_of(dir_ / "anim" / "frame_0002.png"));
}

TEST_F(CliTest, EditCommandsProduceOutputs) {
  RgbaImage patch{2, 2, std::vector<float>(16, 1.0f)};
  {
    const auto bytes = encode_png(patch);
    std::ofstream(dir_ / "patch.png", std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  CliRun r = cli({"edit-texture", "--maps", maps().string(), "--patch", (dir_ / "patch.png").string(), "--rect",
               "0,0,0.5,0.5", "--out", (dir_ / "edited.gam").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(load_maps(dir_ / "edited.gam").color, load_maps(maps()).color);

  r = cli({"edit-shape", "--template", tpl().string(), "--maps", maps().string(), "--to", "0.5,0", "--width", "16",
           "--height", "16", "--out", (dir_ / "shape.png").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "shape.png"));
  r = cli({"edit-shape", "--template", tpl().string(), "--to", "0.5,0,1", "--out", (dir_ / "x.png").string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(cli({"render"}).code, 1);
  EXPECT_EQ(cli({"no-such-command"}).code, 1);
  EXPECT_EQ(cli({"make-toy", "--out", "/x.btpl", "--joints", "1"}).code, 1);
  EXPECT_EQ(cli({"render", "--template", "/definitely/missing.btpl", "--out", "/tmp/x.png"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

}  // namespace
}  // namespace avatar::app
