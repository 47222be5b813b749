// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/rotation.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace avatar {

Quat quat_from_axis_angle(const Eigen::Vector3d& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, rotvec / angle));
}

Quat quat_from_euler_xyz_deg(double x_deg, double y_deg, double z_deg) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const Quat qx(Eigen::AngleAxisd(x_deg * kDeg, Eigen::Vector3d::UnitX()));
  const Quat qy(Eigen::AngleAxisd(y_deg * kDeg, Eigen::Vector3d::UnitY()));
  const Quat qz(Eigen::AngleAxisd(z_deg * kDeg, Eigen::Vector3d::UnitZ()));
  return (qx * qy * qz).normalized();
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Quat quat_from_matrix(const Eigen::Matrix3d& r, const Quat& hint) {
  Quat q(r);
  q.normalize();
  if (q.coeffs().dot(hint.coeffs()) < 0.0) q.coeffs() *= -1.0;
  return q;
}

double orthonormality_residual(const Eigen::Matrix3d& m) {
  return (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
}

}  // namespace avatar
