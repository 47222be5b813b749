// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "avatar/error.hpp"
#include "avatar/fit.hpp"
#include "avatar/pose_io.hpp"
#include "avatar/skinning.hpp"
#include "httplib.h"
#include "scene.hpp"
#include "service.hpp"
#include "session.hpp"

namespace avatar::app {
namespace {

namespace fs = std::filesystem;

struct AvatarOptions {
  std::string template_path;
  std::string maps_path;
  int uv_resolution = kDefaultUvResolution;
  std::vector<double> beta;
  std::vector<double> background{1.0, 1.0, 1.0};

  void add_to(CLI::App* cmd) {
    cmd->add_option("--template", template_path, "Body template (.btpl)")->required();
    cmd->add_option("--maps", maps_path, "Gaussian attribute maps (.gam); neutral gray when omitted");
    cmd->add_option("--uv-res", uv_resolution, "UV resolution used when no maps are given")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--beta", beta, "Shape coefficients (default: all zero)")->delimiter(',');
    cmd->add_option("--background", background, "Background linear RGB")->delimiter(',')->expected(3);
  }

  AvatarState load() const {
    std::optional<fs::path> maps;
    if (!maps_path.empty()) maps = maps_path;
    return load_avatar(template_path, maps, uv_resolution, beta);
  }

  Eigen::Vector3d bg() const { return {background[0], background[1], background[2]}; }
};

struct CameraOptions {
  std::string camera_path;
  int width = 0;
  int height = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--camera", camera_path, "Camera JSON; a framing front view when omitted");
    cmd->add_option("--width", width, "Output width (default: camera width or 512)")->check(CLI::PositiveNumber);
    cmd->add_option("--height", height, "Output height (default: camera height or 512)")
        ->check(CLI::PositiveNumber);
  }

  Camera resolve(const AvatarState& state) const {
    if (camera_path.empty()) return default_camera(state, width > 0 ? width : 512, height > 0 ? height : 512);
    const Camera cam = load_camera(camera_path);
    if (width == 0 && height == 0) return cam;
    return resized(cam, width > 0 ? width : cam.width, height > 0 ? height : cam.height);
  }
};

Pose load_single_pose(const std::string& path, const BodyTemplate& tpl) {
  if (path.empty()) return Pose::identity(tpl.joint_count());
  return load_pose_sequence(path, tpl).frames.front();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "cannot create directory '" + dir.string() + "'");
}

std::string indexed(const char* pattern, std::size_t i) {
  char name[64];
  std::snprintf(name, sizeof name, pattern, i);
  return name;
}

// Every invariant the engine can check on a set of assets. Returns the summary
// line; throws on the first failure.
std::string run_validation(const std::string& template_path, const std::string& maps_path,
                           const std::string& volume_path, const std::string& camera_path,
                           const std::string& pose_path, int uv_resolution) {
  auto tpl = std::make_shared<const BodyTemplate>(load_template(template_path));
  validate(*tpl);
  std::ostringstream summary;
  summary << "template ok: V=" << tpl->vertex_count() << " F=" << tpl->triangle_count()
          << " joints=" << tpl->joint_count() << " shapes=" << tpl->shape_count();

  std::optional<GaussianAttributeMaps> maps;
  if (!maps_path.empty()) {
    MapLoadReport report;
    maps = load_maps(maps_path, &report);
    summary << "; maps " << maps->width << "x" << maps->height << " (" << report.rotations_normalized
            << " rotations renormalized, " << report.color_clamped + report.opacity_clamped << " values clamped)";
  }
  const int w = maps ? maps->width : uv_resolution;
  const int h = maps ? maps->height : uv_resolution;
  AvatarState state = make_avatar(tpl, ShapeParams(tpl->shape_count(), 0.0), w, h, maps);
  const GaussianSet canonical = decode_gaussians(state.body->anchors, state.maps);
  summary << "; anchors=" << state.body->anchors.size();

  const WeightVolume volume = volume_path.empty() ? state.body->volume : load_volume(volume_path);
  for (const auto& voxel : volume.voxels) {
    double sum = 0.0;
    for (float x : voxel.weight) sum += x;
    if (std::abs(sum - 1.0) > 1e-5) throw Error(ErrorCode::InvariantViolation, "volume voxel weights do not sum to 1");
    for (auto j : voxel.joint) {
      if (j >= tpl->joint_count()) throw Error(ErrorCode::InvariantViolation, "volume references an unknown joint");
    }
  }
  const auto weights = query_weights(volume, state.body->anchors, canonical);
  for (const auto& w8 : weights) {
    if (std::abs(w8.sum() - 1.0) > 1e-5) {
      throw Error(ErrorCode::InvariantViolation, "per-Gaussian skin weights do not sum to 1");
    }
  }
  summary << "; weights ok";

  if (!camera_path.empty()) {
    load_camera(camera_path);
    summary << "; camera ok";
  }
  if (!pose_path.empty()) {
    const auto seq = load_pose_sequence(pose_path, *tpl);
    summary << "; poses=" << seq.frames.size();
  }
  return summary.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Animatable Gaussian avatar engine"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  // render
  AvatarOptions render_avatar;
  CameraOptions render_camera;
  std::string render_pose, render_out;
  auto* render_cmd = app.add_subcommand("render", "Render one image");
  render_avatar.add_to(render_cmd);
  render_camera.add_to(render_cmd);
  render_cmd->add_option("--pose", render_pose, "Pose JSON (first frame is used); identity when omitted");
  render_cmd->add_option("--out", render_out, "Output PNG")->required();

  // turntable
  AvatarOptions turn_avatar;
  CameraOptions turn_camera;
  std::string turn_pose, turn_out;
  int turn_views = 24;
  auto* turn_cmd = app.add_subcommand("turntable", "Render evenly spaced views around the avatar");
  turn_avatar.add_to(turn_cmd);
  turn_camera.add_to(turn_cmd);
  turn_cmd->add_option("--views", turn_views, "Number of views")->check(CLI::Range(1, 3600));
  turn_cmd->add_option("--pose", turn_pose, "Pose JSON (first frame is used)");
  turn_cmd->add_option("--out", turn_out, "Output directory")->required();

  // animate
  AvatarOptions anim_avatar;
  CameraOptions anim_camera;
  std::string anim_poses, anim_out;
  auto* anim_cmd = app.add_subcommand("animate", "Render one frame per pose of a sequence");
  anim_avatar.add_to(anim_cmd);
  anim_camera.add_to(anim_cmd);
  anim_cmd->add_option("--poses", anim_poses, "Pose sequence JSON")->required();
  anim_cmd->add_option("--out", anim_out, "Output directory")->required();

  // fit-color
  AvatarOptions fit_avatar;
  std::string fit_views, fit_pose, fit_out, fit_trace;
  int fit_iterations = 200;
  double fit_step = 0.05;
  bool fit_opacity = false;
  auto* fit_cmd = app.add_subcommand("fit-color", "Fit the color maps to posed multi-view images");
  fit_avatar.add_to(fit_cmd);
  fit_cmd->add_option("--views", fit_views, "Directory of view_NNN.png with view_NNN.cam.json")->required();
  fit_cmd->add_option("--pose", fit_pose, "Pose JSON shared by every view (first frame)");
  fit_cmd->add_option("--iterations", fit_iterations, "Optimizer steps")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--step-size", fit_step, "Optimizer step size")->check(CLI::NonNegativeNumber);
  fit_cmd->add_flag("--opacity", fit_opacity, "Optimize the opacity plane as well");
  fit_cmd->add_option("--out", fit_out, "Output maps (.gam)")->required();
  fit_cmd->add_option("--trace", fit_trace, "Loss trace CSV");

  // edit-shape
  AvatarOptions shape_avatar;
  CameraOptions shape_camera;
  std::vector<double> shape_beta;
  std::string shape_pose, shape_out, shape_volume_out;
  auto* shape_cmd = app.add_subcommand("edit-shape", "Reshape the avatar and render the result");
  shape_avatar.add_to(shape_cmd);
  shape_camera.add_to(shape_cmd);
  shape_cmd->add_option("--to", shape_beta, "Target shape coefficients")->delimiter(',')->required();
  shape_cmd->add_option("--pose", shape_pose, "Pose JSON (first frame is used)");
  shape_cmd->add_option("--out", shape_out, "Output PNG")->required();
  shape_cmd->add_option("--volume-out", shape_volume_out, "Write the reshaped skinning volume (.wvol)");

  // edit-texture
  std::string tex_maps, tex_patch, tex_out;
  std::vector<double> tex_rect{0.0, 0.0, 1.0, 1.0};
  auto* tex_cmd = app.add_subcommand("edit-texture", "Blend an RGBA patch into the color map");
  tex_cmd->add_option("--maps", tex_maps, "Input maps (.gam)")->required();
  tex_cmd->add_option("--patch", tex_patch, "RGBA PNG")->required();
  tex_cmd->add_option("--rect", tex_rect, "u0,v0,u1,v1")->delimiter(',')->expected(4);
  tex_cmd->add_option("--out", tex_out, "Output maps (.gam)")->required();

  // validate
  std::string val_template, val_maps, val_volume, val_camera, val_pose;
  int val_uv = kDefaultUvResolution;
  auto* val_cmd = app.add_subcommand("validate", "Check assets against every format and engine invariant");
  val_cmd->add_option("--template", val_template, "Body template (.btpl)")->required();
  val_cmd->add_option("--maps", val_maps, "Gaussian attribute maps (.gam)");
  val_cmd->add_option("--volume", val_volume, "Skinning volume (.wvol)");
  val_cmd->add_option("--camera", val_camera, "Camera JSON");
  val_cmd->add_option("--poses", val_pose, "Pose sequence JSON");
  val_cmd->add_option("--uv-res", val_uv, "UV resolution when no maps are given")->check(CLI::PositiveNumber);

  // make-toy
  std::string toy_out, toy_maps_out, toy_volume_out, toy_pattern = "checker";
  int toy_joints = 5, toy_segments = 6, toy_uv = kDefaultUvResolution;
  auto* toy_cmd = app.add_subcommand("make-toy", "Write the procedural toy template");
  toy_cmd->add_option("--out", toy_out, "Output template (.btpl)")->required();
  toy_cmd->add_option("--joints", toy_joints, "Joint count")->check(CLI::Range(2, 64));
  toy_cmd->add_option("--segments", toy_segments, "Rings per bone")->check(CLI::Range(1, 256));
  toy_cmd->add_option("--seed", seed, "Seed for the bone jitter and the noise pattern");
  toy_cmd->add_option("--maps-out", toy_maps_out, "Also write attribute maps (.gam)");
  toy_cmd->add_option("--uv-res", toy_uv, "UV resolution of --maps-out")->check(CLI::PositiveNumber);
  toy_cmd->add_option("--pattern", toy_pattern, "gray, checker, waves or noise");
  toy_cmd->add_option("--volume-out", toy_volume_out, "Also write the skinning volume (.wvol)");

  // serve
  AvatarOptions serve_avatar;
  std::string serve_host = "127.0.0.1", serve_ui;
  int serve_port = 8080, serve_width = 512, serve_height = 512;
  auto* serve_cmd = app.add_subcommand("serve", "Run the local HTTP service");
  serve_avatar.add_to(serve_cmd);
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_option("--port", serve_port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--width", serve_width, "Default render width")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--height", serve_height, "Default render height")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--ui", serve_ui, "Directory served under /ui/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  }

  try {
    if (*render_cmd) {
      const AvatarState state = render_avatar.load();
      const Camera cam = render_camera.resolve(state);
      const Pose pose = load_single_pose(render_pose, *state.body_template);
      save_png(render(state, pose, cam, render_avatar.bg()), render_out);
      out << "wrote " << render_out << " (" << cam.width << "x" << cam.height << ")\n";
    } else if (*turn_cmd) {
      const AvatarState state = turn_avatar.load();
      const Camera base = turn_camera.resolve(state);
      const Pose pose = load_single_pose(turn_pose, *state.body_template);
      const GaussianSet posed = posed_gaussians(state, pose);
      const auto cameras = orbit_cameras(state, base, turn_views);
      ensure_dir(turn_out);
      for (std::size_t i = 0; i < cameras.size(); ++i) {
        save_png(render_gaussians(posed, cameras[i], turn_avatar.bg()), fs::path(turn_out) / indexed("view_%03zu.png", i));
        save_camera(cameras[i], fs::path(turn_out) / indexed("view_%03zu.cam.json", i));
      }
      out << "wrote " << cameras.size() << " views to " << turn_out << "\n";
    } else if (*anim_cmd) {
      const AvatarState state = anim_avatar.load();
      const Camera cam = anim_camera.resolve(state);
      const PoseSequence seq = load_pose_sequence(anim_poses, *state.body_template);
      const auto frames = animate(state, seq, cam, anim_avatar.bg());
      ensure_dir(anim_out);
      for (std::size_t i = 0; i < frames.size(); ++i) save_png(frames[i], fs::path(anim_out) / indexed("frame_%04zu.png", i));
      out << "wrote " << frames.size() << " frames to " << anim_out << "\n";
    } else if (*fit_cmd) {
      const AvatarState state = fit_avatar.load();
      const Pose pose = load_single_pose(fit_pose, *state.body_template);
      FitConfig config;
      config.iterations = fit_iterations;
      config.step_size = fit_step;
      config.optimize_opacity = fit_opacity;
      config.background = fit_avatar.bg();
      if (!fs::is_directory(fit_views)) throw Error(ErrorCode::Io, "views directory '" + fit_views + "' not found");
      const std::regex name_re(R"(view_(\d+)\.png)");
      std::vector<fs::path> images;
      for (const auto& entry : fs::directory_iterator(fit_views)) {
        if (std::regex_match(entry.path().filename().string(), name_re)) images.push_back(entry.path());
      }
      std::sort(images.begin(), images.end());
      for (const auto& image : images) {
        fs::path cam_path = image;
        cam_path.replace_extension(".cam.json");
        FitView view;
        view.camera = load_camera(cam_path);
        view.target = load_png(image);
        view.pose = pose;
        config.views.push_back(std::move(view));
      }
      if (config.views.empty()) throw Error(ErrorCode::InvalidArgument, "no view_NNN.png images in '" + fit_views + "'");
      const FitResult result = fit_color(state, config);
      save_maps(result.maps, fit_out);
      if (!fit_trace.empty()) write_text(fit_trace, trace_csv(result.trace));
      char line[128];
      std::snprintf(line, sizeof line, "loss %.6g -> %.6g, psnr %.2f dB over %zu views\n", result.trace.loss.front(),
                    result.trace.loss.back(), result.trace.psnr.back(), config.views.size());
      out << line;
    } else if (*shape_cmd) {
      const AvatarState state = shape_avatar.load();
      const AvatarState edited = edit_shape(state, shape_beta);
      const Camera cam = shape_camera.resolve(state);
      const Pose pose = load_single_pose(shape_pose, *state.body_template);
      save_png(render(edited, pose, cam, shape_avatar.bg()), shape_out);
      if (!shape_volume_out.empty()) save_volume(edited.body->volume, shape_volume_out);
      out << "wrote " << shape_out << "\n";
    } else if (*tex_cmd) {
      TexturePatch patch;
      patch.pixels = load_png_rgba(tex_patch);
      patch.rect = {tex_rect[0], tex_rect[1], tex_rect[2], tex_rect[3]};
      const GaussianAttributeMaps maps = load_maps(tex_maps);
      save_maps(edit_texture(maps, patch), tex_out);
      out << "wrote " << tex_out << "\n";
    } else if (*val_cmd) {
      try {
        out << run_validation(val_template, val_maps, val_volume, val_camera, val_pose, val_uv) << "\n";
      } catch (const Error& e) {
        err << "invalid: " << e.what() << "\n";
        return kExitUserError;
      }
    } else if (*toy_cmd) {
      const BodyTemplate tpl = make_toy_template(toy_joints, toy_segments, seed);
      const TexturePattern pattern = parse_pattern(toy_pattern);
      save_template(tpl, toy_out);
      if (!toy_maps_out.empty() || !toy_volume_out.empty()) {
        const auto shared = std::make_shared<const BodyTemplate>(tpl);
        const AvatarState state = make_avatar(shared, ShapeParams(tpl.shape_count(), 0.0), toy_uv, toy_uv);
        if (!toy_maps_out.empty()) save_maps(paint_pattern(state.maps, pattern, seed), toy_maps_out);
        if (!toy_volume_out.empty()) save_volume(state.body->volume, toy_volume_out);
      }
      out << "wrote " << toy_out << " (V=" << tpl.vertex_count() << " F=" << tpl.triangle_count()
          << " joints=" << tpl.joint_count() << ")\n";
    } else if (*serve_cmd) {
      AvatarState state = serve_avatar.load();
      const Camera cam = default_camera(state, serve_width, serve_height);
      auto session = std::make_shared<AvatarSession>(std::move(state), cam, serve_avatar.bg());
      auto server = make_server(session, serve_ui.empty() ? default_ui_dir() : fs::path(serve_ui));
      int port = serve_port;
      if (port == 0) {
        port = server->bind_to_any_port(serve_host);
      } else if (!server->bind_to_port(serve_host, port)) {
        port = -1;
      }
      if (port < 0) {
        err << "error: cannot bind " << serve_host << ":" << serve_port << "\n";
        return kExitUserError;
      }
      out << "listening on http://" << serve_host << ":" << port << "/" << std::endl;
      server->listen_after_bind();
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::NonFiniteLoss ? kExitInternalError : kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("avatar");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace avatar::app
