// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "avatar/body_template.hpp"
#include "avatar/editing.hpp"

namespace avatar {

// .pose.json:
//   {"fps": 30, "joint_names": [...],
//    "frames": [{"root_t": [x, y, z], "rot": [[w, x, y, z], ...]}]}
// A three-element "rot" entry is read as an axis-angle vector (radians) and
// converted to a quaternion. Frames are reordered to the template's joint order
// by name; joints the file omits keep the identity rotation.

PoseSequence parse_pose_sequence(std::string_view json_text, const BodyTemplate& tpl);
std::string pose_sequence_to_json(const PoseSequence& sequence);

PoseSequence load_pose_sequence(const std::filesystem::path& path, const BodyTemplate& tpl);
void save_pose_sequence(const PoseSequence& sequence, const std::filesystem::path& path);

/// A single frame object {"root_t": [...], "rot": [...]}, joints in template order.
Pose parse_pose(std::string_view json_text, const BodyTemplate& tpl);
std::string pose_to_json(const Pose& pose);

}  // namespace avatar
