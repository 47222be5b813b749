// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "avatar/body_template.hpp"
#include "avatar/error.hpp"

namespace avatar {
namespace {

constexpr int kAround = 16;
constexpr double kBoneLength = 0.30;
constexpr double kBoneRadius = 0.06;
constexpr double kHeadRadius = 0.10;
constexpr double kHeadLength = 0.24;
constexpr double kInflate = 0.02;
// Islands cover sqrt(0.75) of their cell on each axis, so 75% of the atlas.
const double kIslandFill = std::sqrt(0.75);
constexpr double kPoleRadius = 0.15;

// Uniform in [-1, 1) from the raw engine output; std distributions are not
// portable across standard libraries.
double jitter(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

enum class Ends { Open, CloseStart, CloseEnd, CloseBoth };

struct Tube {
  Eigen::Vector3d start;
  Eigen::Vector3d axis;  // unit
  Eigen::Vector3d e1, e2;  // e1 x e2 = axis
  double length;
  double radius;
  Ends ends;
  int island;
  Region region;
  // Weight rule: vertex at parameter t gets (1-t) on `from` and t on `to`;
  // from == to means rigidly bound.
  std::uint32_t from, to;
};

double radius_profile(const Tube& tube, double t) {
  // Closed ends follow a quarter circle over the outer 30% of the tube.
  constexpr double kCap = 0.3;
  double scale = 1.0;
  auto cap = [&](double s) {  // s in [0,1], 1 at the pole
    return std::max(kPoleRadius, std::sqrt(std::max(0.0, 1.0 - s * s)));
  };
  if ((tube.ends == Ends::CloseStart || tube.ends == Ends::CloseBoth) && t < kCap) {
    scale = std::min(scale, cap((kCap - t) / kCap));
  }
  if ((tube.ends == Ends::CloseEnd || tube.ends == Ends::CloseBoth) && t > 1.0 - kCap) {
    scale = std::min(scale, cap((t - (1.0 - kCap)) / kCap));
  }
  return tube.radius * scale;
}

void emit_tube(BodyTemplate& tpl, const Tube& tube, int rings, int islands) {
  const auto base = static_cast<std::uint32_t>(tpl.vertices.size());
  const double cell = 1.0 / islands;
  const double u0 = (tube.island + 0.5 * (1.0 - kIslandFill)) * cell;
  const double du = kIslandFill * cell;
  const double v0 = 0.5 * (1.0 - kIslandFill);
  const double dv = kIslandFill;

  std::vector<Eigen::Vector2f> uv;
  for (int i = 0; i <= rings; ++i) {
    const double t = static_cast<double>(i) / rings;
    const double r = radius_profile(tube, t);
    for (int a = 0; a <= kAround; ++a) {
      const double theta = 2.0 * std::numbers::pi * a / kAround;
      const Eigen::Vector3d radial = std::cos(theta) * tube.e1 + std::sin(theta) * tube.e2;
      const Eigen::Vector3d p = tube.start + t * tube.length * tube.axis + r * radial;
      tpl.vertices.push_back(p.cast<float>());
      uv.push_back(Eigen::Vector2d(u0 + du * a / kAround, v0 + dv * t).cast<float>());

      VertexWeights w;
      if (tube.from == tube.to) {
        w.joint[0] = tube.from;
        w.weight[0] = 1.f;
      } else {
        w.joint = {tube.from, tube.to, 0, 0};
        w.weight = {static_cast<float>(1.0 - t), static_cast<float>(t), 0.f, 0.f};
        if (w.weight[0] < w.weight[1]) {
          std::swap(w.joint[0], w.joint[1]);
          std::swap(w.weight[0], w.weight[1]);
        }
      }
      tpl.skin.push_back(w);

      tpl.blendshapes[0].push_back((kInflate * radial).cast<float>());
      tpl.blendshapes[1].push_back((kInflate * radial.y() * Eigen::Vector3d::UnitY()).cast<float>());
    }
  }

  const std::uint32_t stride = kAround + 1;
  for (int i = 0; i < rings; ++i) {
    for (int a = 0; a < kAround; ++a) {
      const std::uint32_t v00 = base + static_cast<std::uint32_t>(i) * stride + static_cast<std::uint32_t>(a);
      const std::uint32_t v01 = v00 + 1;           // next around
      const std::uint32_t v10 = v00 + stride;      // next along
      const std::uint32_t v11 = v10 + 1;
      for (const auto& tri : {std::array<std::uint32_t, 3>{v00, v01, v11},
                              std::array<std::uint32_t, 3>{v00, v11, v10}}) {
        tpl.triangles.push_back(tri);
        tpl.uv_corners.push_back({uv[tri[0] - base], uv[tri[1] - base], uv[tri[2] - base]});
        tpl.region_labels.push_back(tube.region);
      }
    }
  }
}

}  // namespace

BodyTemplate make_toy_template(int joints, int segments_per_bone, std::uint64_t seed) {
  if (joints < 2) throw Error(ErrorCode::InvalidArgument, "toy template needs at least 2 joints");
  const int rings = std::max(1, segments_per_bone);
  std::mt19937_64 rng(seed);

  BodyTemplate tpl;
  tpl.blendshapes.resize(2);
  const auto J = static_cast<std::uint32_t>(joints);

  std::vector<double> lengths(J), radii(J);
  for (std::uint32_t k = 0; k < J; ++k) {
    lengths[k] = static_cast<float>(kBoneLength * (1.0 + 0.1 * jitter(rng)));
    radii[k] = static_cast<float>(kBoneRadius * (1.0 + 0.1 * jitter(rng)));
  }

  double x = 0.0;
  for (std::uint32_t k = 0; k < J; ++k) {
    tpl.parents.push_back(k == 0 ? -1 : static_cast<std::int32_t>(k - 1));
    tpl.rest_joints.push_back(Eigen::Vector3f(static_cast<float>(x), 0.f, 0.f));
    tpl.joint_names.push_back(k == 0 ? "root" : "joint_" + std::to_string(k));
    x += lengths[k];
  }

  const int islands = joints + 1;
  for (std::uint32_t k = 0; k < J; ++k) {
    Tube tube;
    tube.start = tpl.rest_joints[k].cast<double>();
    tube.axis = Eigen::Vector3d::UnitX();
    tube.e1 = Eigen::Vector3d::UnitY();
    tube.e2 = Eigen::Vector3d::UnitZ();
    tube.length = lengths[k];
    tube.radius = radii[k];
    const bool last = k + 1 == J;
    tube.ends = k == 0 ? (last ? Ends::CloseBoth : Ends::CloseStart) : (last ? Ends::CloseEnd : Ends::Open);
    tube.island = static_cast<int>(k);
    tube.region = last ? Region::Hand : Region::Body;
    tube.from = k;
    tube.to = last ? k : k + 1;
    emit_tube(tpl, tube, rings, islands);
  }

  Tube head;
  head.start = Eigen::Vector3d(0.0, radii[0] + 0.02, 0.0);
  head.axis = Eigen::Vector3d::UnitY();
  head.e1 = Eigen::Vector3d::UnitZ();
  head.e2 = Eigen::Vector3d::UnitX();
  head.length = kHeadLength;
  head.radius = kHeadRadius;
  head.ends = Ends::CloseBoth;
  head.island = joints;
  head.region = Region::Face;
  head.from = head.to = 0;
  emit_tube(tpl, head, rings, islands);

  validate(tpl);
  return tpl;
}

}  // namespace avatar
