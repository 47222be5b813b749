// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "session.hpp"

#include <string>

#include "avatar/error.hpp"
#include "scene.hpp"

namespace avatar::app {

RevisionConflict::RevisionConflict(std::uint64_t expected, std::uint64_t current)
    : std::runtime_error("expected revision " + std::to_string(expected) + ", current is " +
                         std::to_string(current)),
      current_(current) {}

AvatarSession::AvatarSession(AvatarState avatar, Camera camera, Eigen::Vector3d background) {
  validate(camera);
  auto state = std::make_shared<SessionState>();
  state->pose = Pose::identity(avatar.body_template->joint_count());
  state->beta = avatar.body->beta;
  state->avatar = std::move(avatar);
  state->camera = camera;
  state->background = background;
  current_ = std::move(state);
}

std::shared_ptr<const SessionState> AvatarSession::snapshot() const {
  std::lock_guard lock(publish_);
  return current_;
}

template <class Edit>
std::uint64_t AvatarSession::mutate(std::optional<std::uint64_t> expected_revision, Edit&& edit) {
  std::lock_guard writer(writer_);
  const auto base = snapshot();
  if (expected_revision && *expected_revision != base->revision) {
    throw RevisionConflict(*expected_revision, base->revision);
  }
  auto next = std::make_shared<SessionState>(*base);
  edit(*next);
  next->revision = base->revision + 1;
  const std::uint64_t revision = next->revision;
  std::lock_guard lock(publish_);
  current_ = std::move(next);
  return revision;
}

std::uint64_t AvatarSession::set_pose(const Pose& pose, std::optional<std::uint64_t> expected_revision) {
  validate_pose(*snapshot()->avatar.body_template, pose);
  return mutate(expected_revision, [&](SessionState& s) { s.pose = pose; });
}

std::uint64_t AvatarSession::set_shape(const ShapeParams& beta, std::optional<std::uint64_t> expected_revision) {
  return mutate(expected_revision, [&](SessionState& s) {
    s.avatar = edit_shape(s.avatar, beta);
    s.beta = beta;
  });
}

std::uint64_t AvatarSession::set_camera(const Camera& camera, std::optional<std::uint64_t> expected_revision) {
  validate(camera);
  return mutate(expected_revision, [&](SessionState& s) { s.camera = camera; });
}

std::uint64_t AvatarSession::apply_patch(const TexturePatch& patch,
                                         std::optional<std::uint64_t> expected_revision) {
  validate(patch);
  return mutate(expected_revision, [&](SessionState& s) { s.avatar.maps = edit_texture(s.avatar.maps, patch); });
}

Image render_snapshot(const SessionState& state, int width, int height) {
  return render(state.avatar, state.pose, resized(state.camera, width, height), state.background);
}

std::vector<std::vector<std::uint8_t>> turntable_snapshot(const SessionState& state, int n_views, int width,
                                                          int height) {
  const auto cameras = orbit_cameras(state.avatar, resized(state.camera, width, height), n_views);
  const GaussianSet posed = posed_gaussians(state.avatar, state.pose);
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(cameras.size());
  for (const auto& cam : cameras) out.push_back(encode_png(render_gaussians(posed, cam, state.background)));
  return out;
}

}  // namespace avatar::app
