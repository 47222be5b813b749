// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/avatar.hpp"

#include "avatar/error.hpp"

namespace avatar {

std::shared_ptr<const ShapedBody> build_shaped_body(const BodyTemplate& tpl, const ShapeParams& beta, int uv_width,
                                                    int uv_height, std::array<int, 3> volume_resolution) {
  auto body = std::make_shared<ShapedBody>();
  body->beta = beta;
  body->vertices = apply_shape(tpl, beta);
  body->anchors = build_anchor_table(tpl, body->vertices, uv_width, uv_height);
  body->volume = build_weight_volume(tpl, body->vertices, volume_resolution);
  return body;
}

AvatarState make_avatar(std::shared_ptr<const BodyTemplate> tpl, const ShapeParams& beta, int uv_width,
                        int uv_height, std::optional<GaussianAttributeMaps> maps,
                        std::array<int, 3> volume_resolution) {
  if (!tpl) throw Error(ErrorCode::InvalidArgument, "avatar needs a template");
  AvatarState state;
  state.body = build_shaped_body(*tpl, beta, uv_width, uv_height, volume_resolution);
  state.body_template = std::move(tpl);
  state.maps = maps ? std::move(*maps) : default_maps(state.body->anchors, Eigen::Vector3f(0.5f, 0.5f, 0.5f));
  return state;
}

GaussianSet canonical_gaussians(const AvatarState& state) {
  GaussianSet g = decode_gaussians(state.body->anchors, state.maps);
  g.weights = query_weights(state.body->volume, state.body->anchors, g);
  return g;
}

GaussianSet pose_gaussians(const BodyTemplate& tpl, const GaussianSet& canonical, const Pose& pose,
                           SkinningStats* stats) {
  return skin_gaussians(canonical, forward_kinematics(tpl, pose), stats);
}

GaussianSet posed_gaussians(const AvatarState& state, const Pose& pose) {
  return pose_gaussians(*state.body_template, canonical_gaussians(state), pose);
}

Image render_gaussians(const GaussianSet& g, const Camera& camera, const Eigen::Vector3d& background) {
  return rasterize(project(camera, g), camera, background);
}

Image render(const AvatarState& state, const Pose& pose, const Camera& camera, const Eigen::Vector3d& background) {
  return render_gaussians(posed_gaussians(state, pose), camera, background);
}

Image render_canonical(const AvatarState& state, const Camera& camera, const Eigen::Vector3d& background) {
  return render_gaussians(canonical_gaussians(state), camera, background);
}

Eigen::Vector3d body_center(const AvatarState& state) {
  const auto& v = state.body->vertices;
  if (v.empty()) return Eigen::Vector3d::Zero();
  Eigen::Vector3d lo = v[0], hi = v[0];
  for (const auto& p : v) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return 0.5 * (lo + hi);
}

double body_radius(const AvatarState& state) {
  const Eigen::Vector3d c = body_center(state);
  double r = 0.0;
  for (const auto& p : state.body->vertices) r = std::max(r, (p - c).norm());
  return r;
}

}  // namespace avatar
