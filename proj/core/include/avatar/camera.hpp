// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace avatar {

/// Pinhole camera, OpenCV axes (x right, y down, z forward). Pixel (i, j) has its
/// center at image coordinates (i, j).
struct Camera {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 1, height = 1;
  Eigen::Matrix4d world_to_cam = Eigen::Matrix4d::Identity();
  double near = 0.01;

  Eigen::Vector3d center() const;

  friend bool operator==(const Camera&, const Camera&) = default;
};

struct Intrinsics {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 1, height = 1;
  double near = 0.01;
};

/// Focal length in millimeters on a 36 mm wide (full-frame equivalent) sensor,
/// square pixels, principal point at the image center.
Intrinsics intrinsics_from_focal_mm(double focal_mm, int width, int height, double sensor_width_mm = 36.0);

/// Throws InvalidArgument unless fx, fy > 0, the size is >= 1 and world_to_cam is
/// rigid within 1e-5.
void validate(const Camera& camera);

Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
               const Intrinsics& intrinsics);

/// Azimuths k * 360 / n_views in degrees.
std::vector<double> rig_azimuths(int n_views);

/// Cameras on a circle around `target` (vertical axis +y), azimuth 0 on +z,
/// all looking at the target with identical intrinsics.
std::vector<Camera> make_rig(int n_views, double elevation_deg, double radius, const Eigen::Vector3d& target,
                             const Intrinsics& intrinsics);

/// Same view at a different image size; focal lengths and principal point scale with it.
Camera resized(const Camera& camera, int width, int height);

std::string camera_to_json(const Camera& camera);
Camera camera_from_json(std::string_view text);
void save_camera(const Camera& camera, const std::filesystem::path& path);
Camera load_camera(const std::filesystem::path& path);

}  // namespace avatar
