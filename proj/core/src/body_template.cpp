// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/body_template.hpp"

#include <cmath>
#include <string>

#include "avatar/error.hpp"
#include "container.hpp"

namespace avatar {
namespace {

constexpr std::string_view kMagic = "BTPL1\n";
constexpr float kRenormalizeTolerance = 1e-4f;

[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorCode::InvariantViolation, what);
}

std::vector<float> flatten(const std::vector<Eigen::Vector3f>& v) {
  std::vector<float> out;
  out.reserve(v.size() * 3);
  for (const auto& p : v) out.insert(out.end(), {p.x(), p.y(), p.z()});
  return out;
}

std::vector<Eigen::Vector3f> unflatten3(const std::vector<float>& f) {
  std::vector<Eigen::Vector3f> out(f.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {f[3 * i], f[3 * i + 1], f[3 * i + 2]};
  return out;
}

}  // namespace

Pose Pose::identity(std::size_t joints) {
  Pose pose;
  pose.joint_rotations.assign(joints, Eigen::Quaterniond::Identity());
  return pose;
}

std::vector<std::size_t> topological_order(std::span<const std::int32_t> parents) {
  const std::size_t n = parents.size();
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t p = parents[i];
    if (p < 0) {
      roots.push_back(i);
    } else if (static_cast<std::size_t>(p) >= n) {
      violation("parent index of joint " + std::to_string(i) + " out of range");
    } else {
      children[static_cast<std::size_t>(p)].push_back(i);
    }
  }
  if (roots.size() != 1) {
    violation("kinematic tree must have exactly one root (found " + std::to_string(roots.size()) + ")");
  }
  std::vector<std::size_t> order{roots.front()};
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t c : children[order[head]]) order.push_back(c);
  }
  if (order.size() != n) violation("kinematic tree contains a cycle");
  return order;
}

void validate(const BodyTemplate& tpl) {
  const std::size_t V = tpl.vertex_count();
  const std::size_t F = tpl.triangle_count();
  const std::size_t J = tpl.joint_count();
  if (J == 0) violation("template has no joints");
  if (tpl.rest_joints.size() != J || tpl.joint_names.size() != J) {
    violation("joint arrays disagree on joint count");
  }
  if (tpl.uv_corners.size() != F || tpl.region_labels.size() != F) {
    violation("per-triangle arrays disagree on triangle count");
  }
  if (tpl.skin.size() != V) violation("skin weight rows disagree on vertex count");
  for (std::size_t s = 0; s < tpl.blendshapes.size(); ++s) {
    if (tpl.blendshapes[s].size() != V) violation("blendshape " + std::to_string(s) + " has wrong length");
  }

  for (std::size_t f = 0; f < F; ++f) {
    for (std::uint32_t idx : tpl.triangles[f]) {
      if (idx >= V) violation("triangle " + std::to_string(f) + " index out of range");
    }
    for (const auto& uv : tpl.uv_corners[f]) {
      if (!(uv.x() >= 0.f && uv.x() <= 1.f && uv.y() >= 0.f && uv.y() <= 1.f)) {
        violation("uv coordinate of triangle " + std::to_string(f) + " outside [0,1]");
      }
    }
    if (static_cast<std::uint8_t>(tpl.region_labels[f]) > 2) {
      violation("unknown region label on triangle " + std::to_string(f));
    }
  }

  for (std::size_t v = 0; v < V; ++v) {
    const auto& row = tpl.skin[v];
    double sum = 0.0;
    for (int i = 0; i < kMaxInfluences; ++i) {
      if (!(row.weight[i] >= 0.f)) violation("negative skin weight at vertex " + std::to_string(v));
      if (row.weight[i] > 0.f && row.joint[i] >= J) {
        violation("skin joint index out of range at vertex " + std::to_string(v));
      }
      sum += row.weight[i];
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      violation("skin weights of vertex " + std::to_string(v) + " sum to " + std::to_string(sum));
    }
  }

  for (const auto& p : tpl.vertices) {
    if (!p.allFinite()) violation("non-finite vertex position");
  }
  topological_order(tpl.parents);
}

std::vector<std::uint8_t> encode_template(const BodyTemplate& tpl) {
  std::vector<std::uint8_t> data;
  nlohmann::json buffers = nlohmann::json::array();
  auto add = [&](const char* name, const char* dtype, std::vector<std::uint8_t> bytes) {
    const std::size_t offset = container::append_aligned(data, bytes);
    buffers.push_back({{"name", name}, {"offset", offset}, {"len", bytes.size()}, {"dtype", dtype}});
  };

  add("vertices", "f32", container::encode_f32(flatten(tpl.vertices)));

  std::vector<std::uint32_t> tris;
  for (const auto& t : tpl.triangles) tris.insert(tris.end(), t.begin(), t.end());
  add("triangles", "u32", container::encode_u32(tris));

  std::vector<float> uvs;
  for (const auto& corners : tpl.uv_corners) {
    for (const auto& uv : corners) uvs.insert(uvs.end(), {uv.x(), uv.y()});
  }
  add("uv_corners", "f32", container::encode_f32(uvs));
  add("parents", "i32", container::encode_i32(tpl.parents));
  add("rest_joints", "f32", container::encode_f32(flatten(tpl.rest_joints)));

  std::vector<std::uint32_t> joints;
  std::vector<float> weights;
  for (const auto& row : tpl.skin) {
    joints.insert(joints.end(), row.joint.begin(), row.joint.end());
    weights.insert(weights.end(), row.weight.begin(), row.weight.end());
  }
  add("skin_joint_idx", "u32", container::encode_u32(joints));
  add("skin_weight_val", "f32", container::encode_f32(weights));

  std::vector<float> shapes;
  for (const auto& bs : tpl.blendshapes) {
    const auto flat = flatten(bs);
    shapes.insert(shapes.end(), flat.begin(), flat.end());
  }
  add("blendshapes", "f32", container::encode_f32(shapes));

  std::vector<std::uint8_t> labels;
  for (Region r : tpl.region_labels) labels.push_back(static_cast<std::uint8_t>(r));
  add("region_labels", "u8", labels);

  nlohmann::json header = {{"V", tpl.vertex_count()},
                           {"F", tpl.triangle_count()},
                           {"n_b", tpl.joint_count()},
                           {"S", tpl.shape_count()},
                           {"joint_names", tpl.joint_names},
                           {"buffers", buffers}};
  return container::pack(kMagic, header, data);
}

namespace {

BodyTemplate decode_template_sections(std::span<const std::uint8_t> bytes) {
  const auto section = container::unpack(kMagic, bytes);
  const auto& h = section.header;

  std::size_t V = 0, F = 0, J = 0, S = 0;
  try {
    V = h.at("V").get<std::size_t>();
    F = h.at("F").get<std::size_t>();
    J = h.at("n_b").get<std::size_t>();
    S = h.at("S").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("template header: ") + e.what());
  }

  auto buffer = [&](const std::string& name, std::size_t expected_len) {
    for (const auto& b : h.at("buffers")) {
      if (b.at("name").get<std::string>() != name) continue;
      const auto len = b.at("len").get<std::size_t>();
      if (len != expected_len) {
        throw Error(ErrorCode::CountMismatch, "buffer '" + name + "' has " + std::to_string(len) +
                                                  " bytes, header counts imply " +
                                                  std::to_string(expected_len));
      }
      return container::slice(section, b.at("offset").get<std::size_t>(), len, name);
    }
    throw Error(ErrorCode::CountMismatch, "missing buffer '" + name + "'");
  };

  BodyTemplate tpl;
  tpl.vertices = unflatten3(container::decode_f32(buffer("vertices", V * 12)));

  const auto tris = container::decode_u32(buffer("triangles", F * 12));
  tpl.triangles.resize(F);
  for (std::size_t f = 0; f < F; ++f) tpl.triangles[f] = {tris[3 * f], tris[3 * f + 1], tris[3 * f + 2]};

  const auto uvs = container::decode_f32(buffer("uv_corners", F * 24));
  tpl.uv_corners.resize(F);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t c = 0; c < 3; ++c) tpl.uv_corners[f][c] = {uvs[6 * f + 2 * c], uvs[6 * f + 2 * c + 1]};
  }

  tpl.parents = container::decode_i32(buffer("parents", J * 4));
  tpl.rest_joints = unflatten3(container::decode_f32(buffer("rest_joints", J * 12)));

  const auto joints = container::decode_u32(buffer("skin_joint_idx", V * 16));
  const auto weights = container::decode_f32(buffer("skin_weight_val", V * 16));
  tpl.skin.resize(V);
  for (std::size_t v = 0; v < V; ++v) {
    auto& row = tpl.skin[v];
    float sum = 0.f;
    for (int i = 0; i < kMaxInfluences; ++i) {
      row.joint[i] = joints[4 * v + i];
      row.weight[i] = weights[4 * v + i];
      sum += row.weight[i];
    }
    if (std::abs(sum - 1.f) <= kRenormalizeTolerance) {
      if (sum != 1.f) {
        for (float& w : row.weight) w /= sum;
      }
    } else {
      violation("skin weights of vertex " + std::to_string(v) + " sum to " + std::to_string(sum));
    }
  }

  const auto shapes = container::decode_f32(buffer("blendshapes", S * V * 12));
  tpl.blendshapes.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    tpl.blendshapes[s] = unflatten3(
        std::vector<float>(shapes.begin() + static_cast<std::ptrdiff_t>(s * V * 3),
                           shapes.begin() + static_cast<std::ptrdiff_t>((s + 1) * V * 3)));
  }

  const auto labels = buffer("region_labels", F);
  tpl.region_labels.reserve(F);
  for (std::uint8_t l : labels) tpl.region_labels.push_back(static_cast<Region>(l));

  if (h.contains("joint_names")) {
    tpl.joint_names = h.at("joint_names").get<std::vector<std::string>>();
  } else {
    for (std::size_t j = 0; j < J; ++j) tpl.joint_names.push_back("joint_" + std::to_string(j));
  }
  if (tpl.joint_names.size() != J) {
    throw Error(ErrorCode::CountMismatch, "joint_names length disagrees with n_b");
  }

  validate(tpl);
  return tpl;
}

}  // namespace

BodyTemplate decode_template(std::span<const std::uint8_t> bytes) {
  try {
    return decode_template_sections(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("template header: ") + e.what());
  }
}

void save_template(const BodyTemplate& tpl, const std::filesystem::path& path) {
  container::write_file(path, encode_template(tpl));
}

BodyTemplate load_template(const std::filesystem::path& path) {
  return decode_template(container::read_file(path));
}

std::vector<Eigen::Vector3d> base_vertices(const BodyTemplate& tpl) {
  std::vector<Eigen::Vector3d> out(tpl.vertex_count());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = tpl.vertices[v].cast<double>();
  return out;
}

std::vector<Eigen::Vector3d> apply_shape(const BodyTemplate& tpl, std::span<const double> beta) {
  if (beta.size() != tpl.shape_count()) {
    throw Error(ErrorCode::LengthMismatch, "shape vector has " + std::to_string(beta.size()) +
                                               " coefficients, template expects " +
                                               std::to_string(tpl.shape_count()));
  }
  auto out = base_vertices(tpl);
  for (std::size_t s = 0; s < beta.size(); ++s) {
    const double b = beta[s];
    const auto& shape = tpl.blendshapes[s];
    for (std::size_t v = 0; v < out.size(); ++v) out[v] += b * shape[v].cast<double>();
  }
  return out;
}

void validate_pose(const BodyTemplate& tpl, const Pose& pose) {
  if (pose.joint_rotations.size() != tpl.joint_count()) {
    throw Error(ErrorCode::InvalidArgument, "pose has " + std::to_string(pose.joint_rotations.size()) +
                                                " rotations, template has " +
                                                std::to_string(tpl.joint_count()) + " joints");
  }
  for (std::size_t j = 0; j < pose.joint_rotations.size(); ++j) {
    if (std::abs(pose.joint_rotations[j].norm() - 1.0) > 1e-6) {
      throw Error(ErrorCode::InvalidArgument, "rotation of joint " + std::to_string(j) + " is not unit norm");
    }
  }
  if (!pose.root_translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "root translation is not finite");
  }
}

JointTransforms forward_kinematics(const BodyTemplate& tpl, const Pose& pose) {
  validate_pose(tpl, pose);
  // B_j = B_parent * T(j) R_j T(-j), which equals G_j(pose) G_j(rest)^-1 but stays
  // bitwise identity for the rest pose.
  JointTransforms out;
  out.matrices.assign(tpl.joint_count(), Eigen::Matrix4d::Identity());
  for (std::size_t j : topological_order(tpl.parents)) {
    const Eigen::Matrix3d rot = pose.joint_rotations[j].toRotationMatrix();
    const Eigen::Vector3d joint = tpl.rest_joints[j].cast<double>();
    Eigen::Matrix4d local = Eigen::Matrix4d::Identity();
    local.topLeftCorner<3, 3>() = rot;
    local.topRightCorner<3, 1>() = joint - rot * joint;

    const std::int32_t parent = tpl.parents[j];
    if (parent < 0) {
      Eigen::Matrix4d root = Eigen::Matrix4d::Identity();
      root.topRightCorner<3, 1>() = pose.root_translation;
      out.matrices[j] = root * local;
    } else {
      out.matrices[j] = out.matrices[static_cast<std::size_t>(parent)] * local;
    }
  }
  return out;
}

}  // namespace avatar
