// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/pose_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "avatar/error.hpp"
#include "avatar/rotation.hpp"
#include "json.hpp"

namespace avatar {
namespace {

using nlohmann::json;

Eigen::Quaterniond rotation_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() == 3) return quat_from_axis_angle(Eigen::Vector3d(v[0], v[1], v[2]));
  if (v.size() != 4) throw Error(ErrorCode::Parse, "rotation must have 3 (axis-angle) or 4 (w,x,y,z) values");
  Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
  const double norm = q.norm();
  if (!(norm > 1e-9) || !std::isfinite(norm)) throw Error(ErrorCode::Parse, "rotation quaternion has zero norm");
  q.coeffs() /= norm;
  return q;
}

// `order[i]` is the template joint that file joint i maps to.
Pose frame_from_json(const json& frame, const std::vector<std::size_t>& order, std::size_t joints) {
  Pose pose = Pose::identity(joints);
  if (frame.contains("root_t")) {
    const auto t = frame.at("root_t").get<std::vector<double>>();
    if (t.size() != 3) throw Error(ErrorCode::Parse, "root_t must have 3 values");
    pose.root_translation = Eigen::Vector3d(t[0], t[1], t[2]);
  }
  const auto& rot = frame.at("rot");
  if (rot.size() != order.size()) {
    throw Error(ErrorCode::Parse, "frame has " + std::to_string(rot.size()) + " rotations, expected " +
                                      std::to_string(order.size()));
  }
  for (std::size_t i = 0; i < order.size(); ++i) pose.joint_rotations[order[i]] = rotation_from_json(rot[i]);
  return pose;
}

json pose_json(const Pose& pose) {
  json rot = json::array();
  for (const auto& q : pose.joint_rotations) rot.push_back({q.w(), q.x(), q.y(), q.z()});
  return {{"root_t", {pose.root_translation.x(), pose.root_translation.y(), pose.root_translation.z()}},
          {"rot", rot}};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open pose file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PoseSequence parse_pose_sequence(std::string_view json_text, const BodyTemplate& tpl) {
  PoseSequence seq;
  try {
    const json j = json::parse(json_text);
    seq.fps = j.value("fps", 30.0);
    std::vector<std::size_t> order;
    if (j.contains("joint_names")) {
      for (const auto& name : j.at("joint_names").get<std::vector<std::string>>()) {
        const auto it = std::find(tpl.joint_names.begin(), tpl.joint_names.end(), name);
        if (it == tpl.joint_names.end()) throw Error(ErrorCode::Parse, "unknown joint '" + name + "'");
        order.push_back(static_cast<std::size_t>(it - tpl.joint_names.begin()));
      }
    } else {
      for (std::size_t i = 0; i < tpl.joint_count(); ++i) order.push_back(i);
    }
    for (const auto& frame : j.at("frames")) seq.frames.push_back(frame_from_json(frame, order, tpl.joint_count()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("pose JSON: ") + e.what());
  }
  seq.joint_names = tpl.joint_names;
  validate(tpl, seq);
  return seq;
}

std::string pose_sequence_to_json(const PoseSequence& sequence) {
  json frames = json::array();
  for (const auto& pose : sequence.frames) frames.push_back(pose_json(pose));
  const json j = {{"fps", sequence.fps}, {"joint_names", sequence.joint_names}, {"frames", frames}};
  return j.dump(2);
}

PoseSequence load_pose_sequence(const std::filesystem::path& path, const BodyTemplate& tpl) {
  return parse_pose_sequence(read_text(path), tpl);
}

void save_pose_sequence(const PoseSequence& sequence, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << pose_sequence_to_json(sequence) << '\n';
}

Pose parse_pose(std::string_view json_text, const BodyTemplate& tpl) {
  Pose pose;
  try {
    std::vector<std::size_t> order(tpl.joint_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    pose = frame_from_json(json::parse(json_text), order, tpl.joint_count());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("pose JSON: ") + e.what());
  }
  validate_pose(tpl, pose);
  return pose;
}

std::string pose_to_json(const Pose& pose) { return pose_json(pose).dump(); }

}  // namespace avatar
