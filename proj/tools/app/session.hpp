// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "avatar/avatar.hpp"
#include "avatar/editing.hpp"
#include "avatar/image.hpp"

namespace avatar::app {

/// One immutable revision of the interactive session.
struct SessionState {
  AvatarState avatar;
  Pose pose;
  ShapeParams beta;
  Camera camera;
  Eigen::Vector3d background = Eigen::Vector3d::Ones();
  std::uint64_t revision = 0;
};

class RevisionConflict : public std::runtime_error {
 public:
  RevisionConflict(std::uint64_t expected, std::uint64_t current);
  std::uint64_t current() const noexcept { return current_; }

 private:
  std::uint64_t current_;
};

/// Mutations are serialized and publish a fresh snapshot; readers hold on to the
/// snapshot they took, so a render never mixes two revisions.
class AvatarSession {
 public:
  AvatarSession(AvatarState avatar, Camera camera, Eigen::Vector3d background);

  std::shared_ptr<const SessionState> snapshot() const;

  std::uint64_t set_pose(const Pose& pose, std::optional<std::uint64_t> expected_revision = std::nullopt);
  std::uint64_t set_shape(const ShapeParams& beta, std::optional<std::uint64_t> expected_revision = std::nullopt);
  std::uint64_t set_camera(const Camera& camera, std::optional<std::uint64_t> expected_revision = std::nullopt);
  std::uint64_t apply_patch(const TexturePatch& patch,
                            std::optional<std::uint64_t> expected_revision = std::nullopt);

 private:
  template <class Edit>
  std::uint64_t mutate(std::optional<std::uint64_t> expected_revision, Edit&& edit);

  std::mutex writer_;
  mutable std::mutex publish_;
  std::shared_ptr<const SessionState> current_;
};

Image render_snapshot(const SessionState& state, int width, int height);

/// PNG per orbit view, named view_000.png onwards.
std::vector<std::vector<std::uint8_t>> turntable_snapshot(const SessionState& state, int n_views, int width,
                                                          int height);

}  // namespace avatar::app
