// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/camera.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "avatar/error.hpp"
#include "avatar/rotation.hpp"
#include "json.hpp"

namespace avatar {

Eigen::Vector3d Camera::center() const {
  const Eigen::Matrix3d r = world_to_cam.topLeftCorner<3, 3>();
  return -r.transpose() * world_to_cam.topRightCorner<3, 1>();
}

Intrinsics intrinsics_from_focal_mm(double focal_mm, int width, int height, double sensor_width_mm) {
  Intrinsics k;
  k.fx = k.fy = focal_mm / sensor_width_mm * width;
  k.cx = 0.5 * (width - 1);
  k.cy = 0.5 * (height - 1);
  k.width = width;
  k.height = height;
  return k;
}

void validate(const Camera& camera) {
  if (!(camera.fx > 0.0 && camera.fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  if (camera.width < 1 || camera.height < 1) throw Error(ErrorCode::InvalidArgument, "image size must be >= 1");
  if (!(camera.near > 0.0)) throw Error(ErrorCode::InvalidArgument, "near plane must be positive");
  const Eigen::Matrix3d r = camera.world_to_cam.topLeftCorner<3, 3>();
  if (orthonormality_residual(r) > 1e-5 || std::abs(r.determinant() - 1.0) > 1e-5) {
    throw Error(ErrorCode::InvalidArgument, "world_to_cam is not a rigid transform");
  }
  const Eigen::RowVector4d last = camera.world_to_cam.row(3);
  if ((last - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-9 || !camera.world_to_cam.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "world_to_cam bottom row must be (0,0,0,1)");
  }
}

Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
               const Intrinsics& intrinsics) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d right = forward.cross(up);
  if (right.norm() < 1e-12) right = forward.cross(Eigen::Vector3d::UnitZ());
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);

  Camera cam;
  cam.fx = intrinsics.fx;
  cam.fy = intrinsics.fy;
  cam.cx = intrinsics.cx;
  cam.cy = intrinsics.cy;
  cam.width = intrinsics.width;
  cam.height = intrinsics.height;
  cam.near = intrinsics.near;
  Eigen::Matrix3d r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = forward;
  cam.world_to_cam.setIdentity();
  cam.world_to_cam.topLeftCorner<3, 3>() = r;
  cam.world_to_cam.topRightCorner<3, 1>() = -r * eye;
  return cam;
}

std::vector<double> rig_azimuths(int n_views) {
  if (n_views < 1) throw Error(ErrorCode::InvalidArgument, "a rig needs at least one view");
  std::vector<double> out(static_cast<std::size_t>(n_views));
  for (int k = 0; k < n_views; ++k) out[static_cast<std::size_t>(k)] = k * 360.0 / n_views;
  return out;
}

std::vector<Camera> make_rig(int n_views, double elevation_deg, double radius, const Eigen::Vector3d& target,
                             const Intrinsics& intrinsics) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double elevation = elevation_deg * kDeg;
  std::vector<Camera> rig;
  for (double azimuth_deg : rig_azimuths(n_views)) {
    const double azimuth = azimuth_deg * kDeg;
    const Eigen::Vector3d offset(std::sin(azimuth) * std::cos(elevation), std::sin(elevation),
                                 std::cos(azimuth) * std::cos(elevation));
    rig.push_back(look_at(target + radius * offset, target, Eigen::Vector3d::UnitY(), intrinsics));
  }
  return rig;
}

Camera resized(const Camera& camera, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "image size must be >= 1");
  Camera out = camera;
  const double sx = static_cast<double>(width) / camera.width;
  const double sy = static_cast<double>(height) / camera.height;
  out.fx *= sx;
  out.fy *= sy;
  out.cx = (camera.cx + 0.5) * sx - 0.5;
  out.cy = (camera.cy + 0.5) * sy - 0.5;
  out.width = width;
  out.height = height;
  return out;
}

std::string camera_to_json(const Camera& camera) {
  nlohmann::json j;
  j["fx"] = camera.fx;
  j["fy"] = camera.fy;
  j["cx"] = camera.cx;
  j["cy"] = camera.cy;
  j["width"] = camera.width;
  j["height"] = camera.height;
  j["near"] = camera.near;
  std::vector<double> m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m.push_back(camera.world_to_cam(r, c));
  }
  j["world_to_cam"] = m;
  return j.dump(2);
}

Camera camera_from_json(std::string_view text) {
  Camera cam;
  try {
    const auto j = nlohmann::json::parse(text);
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.near = j.value("near", 0.01);
    const auto m = j.at("world_to_cam").get<std::vector<double>>();
    if (m.size() != 16) throw Error(ErrorCode::Parse, "world_to_cam must hold 16 values");
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) cam.world_to_cam(r, c) = m[static_cast<std::size_t>(4 * r + c)];
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("camera JSON: ") + e.what());
  }
  validate(cam);
  return cam;
}

void save_camera(const Camera& camera, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << camera_to_json(camera) << '\n';
}

Camera load_camera(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open camera file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return camera_from_json(ss.str());
}

}  // namespace avatar
