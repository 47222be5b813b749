// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace avatar {

using Quat = Eigen::Quaterniond;

/// Rotation vector (axis scaled by angle in radians) to unit quaternion.
Quat quat_from_axis_angle(const Eigen::Vector3d& rotvec);

/// Intrinsic X-then-Y-then-Z Euler angles in degrees: R = Rx * Ry * Rz.
/// This is the convention the browser viewer's sliders use.
Quat quat_from_euler_xyz_deg(double x_deg, double y_deg, double z_deg);

/// Nearest rotation to `m` in the Frobenius norm (polar factor), det +1.
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

/// Quaternion of a rotation matrix, sign chosen so that dot(result, hint) >= 0.
Quat quat_from_matrix(const Eigen::Matrix3d& r, const Quat& hint);

/// ||M^T M - I||_F, zero for an orthonormal matrix.
double orthonormality_residual(const Eigen::Matrix3d& m);

}  // namespace avatar
