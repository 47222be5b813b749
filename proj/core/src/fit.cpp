// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "avatar/error.hpp"
#include "avatar/renderer.hpp"

namespace avatar {
namespace {

struct ViewEval {
  double loss = 0.0;
  double mse = 0.0;
  std::vector<double> dloss_dpixel;
};

// Loss and dLoss/dPixel of one view. The residual is taken on the output image,
// so a target rendered from the same state yields exactly zero gradient.
ViewEval evaluate_view(std::span<const Splat2D> splats, const Camera& camera, const Eigen::Vector3d& background,
                       const Image& target, const PerceptualLoss& perceptual, double lambda) {
  if (target.width != camera.width || target.height != camera.height) {
    throw Error(ErrorCode::DimensionMismatch, "target image size differs from the camera resolution");
  }
  const Image prediction = rasterize_framebuffer(splats, camera, background).to_image();
  ViewEval eval;
  eval.mse = mse(prediction, target);
  eval.loss = eval.mse;
  const double scale = 2.0 / static_cast<double>(prediction.rgb.size());
  eval.dloss_dpixel.resize(prediction.rgb.size());
  for (std::size_t i = 0; i < prediction.rgb.size(); ++i) {
    eval.dloss_dpixel[i] = scale * (static_cast<double>(prediction.rgb[i]) - static_cast<double>(target.rgb[i]));
  }
  if (perceptual && lambda != 0.0) {
    std::vector<double> grad(prediction.rgb.size(), 0.0);
    eval.loss += lambda * perceptual(prediction, target, grad);
    if (grad.size() != eval.dloss_dpixel.size()) {
      throw Error(ErrorCode::DimensionMismatch, "perceptual loss returned a gradient of the wrong size");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) eval.dloss_dpixel[i] += lambda * grad[i];
  }
  return eval;
}

void scatter_to_texels(std::span<const Splat2D> splats, const SplatGradients& g, const AnchorTable& anchors,
                       double scale, std::vector<double>& color, std::vector<double>* opacity) {
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const std::size_t texel = anchors.anchors[splats[i].source].texel;
    for (int c = 0; c < 3; ++c) color[3 * texel + c] += scale * g.color[i][c];
    if (opacity != nullptr) (*opacity)[texel] += scale * g.alpha[i];
  }
}

void refresh_splats(std::vector<Splat2D>& splats, const GaussianAttributeMaps& maps, const AnchorTable& anchors,
                    bool opacity_changes) {
  for (auto& s : splats) {
    const std::size_t t = anchors.anchors[s.source].texel;
    s.color = Eigen::Vector3d(maps.color[3 * t], maps.color[3 * t + 1], maps.color[3 * t + 2]);
    if (opacity_changes) {
      s.alpha = maps.opacity[t];
      update_extent(s);
    }
  }
}

struct Adam {
  std::vector<double> m, v;
  void step(std::vector<float>& params, const std::vector<double>& grad, const FitConfig& cfg, int t) {
    if (m.empty()) {
      m.assign(grad.size(), 0.0);
      v.assign(grad.size(), 0.0);
    }
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      if (grad[i] == 0.0 && m[i] == 0.0) continue;
      const double update = cfg.step_size * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + cfg.epsilon);
      params[i] = static_cast<float>(std::clamp(static_cast<double>(params[i]) - update, 0.0, 1.0));
    }
  }
};

std::string trace_message(const FitTrace& trace) {
  std::ostringstream os;
  os << "loss became non-finite after " << trace.loss.size() << " evaluations; trace:";
  for (double l : trace.loss) os << ' ' << l;
  return os.str();
}

}  // namespace

void validate(const FitConfig& config) {
  if (config.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (!(config.step_size >= 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be non-negative");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "moment coefficients must lie in [0,1)");
  }
  if (!(config.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (config.views.empty()) throw Error(ErrorCode::InvalidArgument, "fitting needs at least one view");
}

MapGradients color_backward(const AvatarState& state, const Pose& pose, const Camera& camera, const Image& target,
                            const Eigen::Vector3d& background, bool with_opacity) {
  const GaussianSet posed = posed_gaussians(state, pose);
  const std::vector<Splat2D> splats = project(camera, posed);
  const ViewEval eval = evaluate_view(splats, camera, background, target, {}, 0.0);
  const SplatGradients g = rasterize_backward(splats, camera, background, eval.dloss_dpixel, with_opacity);

  MapGradients out;
  out.loss = eval.loss;
  out.color.assign(state.maps.texel_count() * 3, 0.0);
  if (with_opacity) out.opacity.assign(state.maps.texel_count(), 0.0);
  scatter_to_texels(splats, g, state.body->anchors, 1.0, out.color, with_opacity ? &out.opacity : nullptr);
  return out;
}

FitResult fit_color(const AvatarState& state, const FitConfig& config) {
  validate(config);
  const AnchorTable& anchors = state.body->anchors;
  const GaussianSet canonical = canonical_gaussians(state);

  std::vector<std::vector<Splat2D>> view_splats;
  view_splats.reserve(config.views.size());
  for (const auto& view : config.views) {
    view_splats.push_back(project(view.camera, pose_gaussians(*state.body_template, canonical, view.pose)));
  }

  FitResult result;
  result.maps = state.maps;
  GaussianAttributeMaps& maps = result.maps;
  const double view_weight = 1.0 / static_cast<double>(config.views.size());
  const std::size_t texels = maps.texel_count();
  Adam color_opt, opacity_opt;

  auto evaluate = [&](bool with_gradients, std::vector<double>& color_grad, std::vector<double>& opacity_grad) {
    double loss = 0.0, error = 0.0;
    for (std::size_t v = 0; v < config.views.size(); ++v) {
      auto& splats = view_splats[v];
      refresh_splats(splats, maps, anchors, config.optimize_opacity);
      const auto& view = config.views[v];
      const ViewEval eval = evaluate_view(splats, view.camera, config.background, view.target, config.perceptual,
                                          config.lambda_perceptual);
      loss += view_weight * eval.loss;
      error += view_weight * eval.mse;
      if (with_gradients) {
        const SplatGradients g =
            rasterize_backward(splats, view.camera, config.background, eval.dloss_dpixel, config.optimize_opacity);
        scatter_to_texels(splats, g, anchors, view_weight, color_grad,
                          config.optimize_opacity ? &opacity_grad : nullptr);
      }
    }
    result.trace.loss.push_back(loss);
    result.trace.psnr.push_back(psnr_from_mse(error));
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, trace_message(result.trace));
  };

  std::vector<double> color_grad, opacity_grad;
  for (int it = 1; it <= config.iterations; ++it) {
    color_grad.assign(texels * 3, 0.0);
    opacity_grad.assign(config.optimize_opacity ? texels : 0, 0.0);
    evaluate(true, color_grad, opacity_grad);
    color_opt.step(maps.color, color_grad, config, it);
    if (config.optimize_opacity) opacity_opt.step(maps.opacity, opacity_grad, config, it);
  }
  evaluate(false, color_grad, opacity_grad);
  return result;
}

std::string trace_csv(const FitTrace& trace) {
  std::string out = "iter,loss,psnr\n";
  char line[96];
  for (std::size_t i = 0; i < trace.loss.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.6f\n", i, trace.loss[i], trace.psnr[i]);
    out += line;
  }
  return out;
}

}  // namespace avatar
