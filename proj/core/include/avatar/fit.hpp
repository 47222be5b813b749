// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "avatar/avatar.hpp"
#include "avatar/camera.hpp"
#include "avatar/image.hpp"

namespace avatar {

/// Mean over pixels and channels of the squared difference.
double mse(const Image& a, const Image& b);

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / mse), capped at 99 dB for identical images.
double psnr(const Image& a, const Image& b);
double psnr_from_mse(double mse_value);

/// Optional image-space loss added to the MSE with weight lambda. Returns the loss
/// and writes dLoss/dPrediction (3 per pixel) into `grad`.
using PerceptualLoss =
    std::function<double(const Image& prediction, const Image& target, std::vector<double>& grad)>;

struct FitView {
  Camera camera;
  Image target;
  Pose pose;
};

struct FitConfig {
  int iterations = 200;
  double step_size = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<FitView> views;
  Eigen::Vector3d background = Eigen::Vector3d::Zero();
  bool optimize_opacity = false;
  PerceptualLoss perceptual;        // none by default
  double lambda_perceptual = 0.0;  // use 1.0 when a perceptual loss is attached
};

void validate(const FitConfig& config);

/// Gradients of the view loss with respect to texel attributes, texel-major like
/// the maps (3 per texel for color, 1 for opacity).
struct MapGradients {
  double loss = 0.0;
  std::vector<double> color;
  std::vector<double> opacity;  // empty unless requested
};

/// Analytic gradient of mse(render, target) through compositing and the
/// anchor/texel bijection. Culled or invisible texels get exactly zero.
MapGradients color_backward(const AvatarState& state, const Pose& pose, const Camera& camera, const Image& target,
                            const Eigen::Vector3d& background, bool with_opacity = false);

struct FitTrace {
  std::vector<double> loss;  // entry i: loss before step i; last entry: final loss
  std::vector<double> psnr;
};

struct FitResult {
  GaussianAttributeMaps maps;
  FitTrace trace;
};

/// Full-batch adaptive-moment descent on the color (and optionally opacity)
/// planes, loss averaged over views. Throws NonFiniteLoss with the partial trace
/// in the message if the loss stops being finite.
FitResult fit_color(const AvatarState& state, const FitConfig& config);

/// "iter,loss,psnr" rows.
std::string trace_csv(const FitTrace& trace);

}  // namespace avatar
