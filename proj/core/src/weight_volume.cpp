// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "avatar/error.hpp"
#include "avatar/parallel.hpp"
#include "avatar/rotation.hpp"
#include "avatar/skinning.hpp"
#include "container.hpp"

namespace avatar {
namespace {

constexpr std::string_view kMagic = "WVOL1\n";
constexpr double kDistanceFloor = 1e-6;
constexpr double kMarginFraction = 0.10;
constexpr double kMinMargin = 1e-3;
constexpr std::uint32_t kLeafSize = 8;

VertexWeights to_vertex_weights(const JointWeights& w) {
  VertexWeights out;
  out.joint = w.joint;
  float sum = 0.f;
  for (int i = 0; i < kMaxInfluences; ++i) {
    out.weight[i] = static_cast<float>(w.weight[i]);
    sum += out.weight[i];
  }
  // Keep the float row a partition of unity after rounding.
  if (sum > 0.f && sum != 1.f) out.weight[0] += 1.f - sum;
  return out;
}

}  // namespace

PointIndex::PointIndex(std::span<const Eigen::Vector3d> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t PointIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, 0.0, -1, -1});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (points_[a][axis] != points_[b][axis]) return points_[a][axis] < points_[b][axis];
                     return a < b;
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].axis = axis;
  nodes_[static_cast<std::size_t>(id)].split = split;
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<std::uint32_t> PointIndex::nearest(const Eigen::Vector3d& query, int k) const {
  using Entry = std::pair<double, std::uint32_t>;  // (squared distance, index), max-heap
  std::priority_queue<Entry> heap;
  const auto want = static_cast<std::size_t>(std::max(0, k));
  if (want == 0 || nodes_.empty()) return {};

  auto visit = [&](auto&& self, std::int32_t id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t p = order_[i];
        const Entry e{(points_[p] - query).squaredNorm(), p};
        if (heap.size() < want) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      return;
    }
    const double delta = query[node.axis] - node.split;
    const std::int32_t near_child = delta < 0.0 ? node.left : node.right;
    const std::int32_t far_child = delta < 0.0 ? node.right : node.left;
    self(self, near_child);
    // <= keeps equal-distance candidates reachable for index tie-breaking.
    if (heap.size() < want || delta * delta <= heap.top().first) self(self, far_child);
  };
  visit(visit, 0);

  std::vector<std::uint32_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

Eigen::Vector3d WeightVolume::voxel_size() const {
  return (upper - lower).cwiseQuotient(Eigen::Vector3d(resolution[0], resolution[1], resolution[2]));
}

Eigen::Vector3d WeightVolume::voxel_center(int x, int y, int z) const {
  return lower + (Eigen::Vector3d(x, y, z) + Eigen::Vector3d::Constant(0.5)).cwiseProduct(voxel_size());
}

const VertexWeights& WeightVolume::at(int x, int y, int z) const {
  return voxels[(static_cast<std::size_t>(z) * resolution[1] + static_cast<std::size_t>(y)) * resolution[0] +
                static_cast<std::size_t>(x)];
}

WeightVolume build_weight_volume(const BodyTemplate& tpl, std::span<const Eigen::Vector3d> shaped_vertices,
                                 std::array<int, 3> resolution) {
  if (tpl.vertex_count() == 0 || shaped_vertices.empty()) {
    throw Error(ErrorCode::EmptyTemplate, "cannot build a weight volume without vertices");
  }
  if (shaped_vertices.size() != tpl.vertex_count()) {
    throw Error(ErrorCode::LengthMismatch, "shaped vertex count differs from the template");
  }
  for (int r : resolution) {
    if (r < 8) throw Error(ErrorCode::InvalidArgument, "weight volume resolution must be >= 8 per axis");
  }

  WeightVolume volume;
  volume.resolution = resolution;
  Eigen::Vector3d lo = shaped_vertices[0], hi = lo;
  for (const auto& p : shaped_vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector3d margin = ((hi - lo) * kMarginFraction).cwiseMax(Eigen::Vector3d::Constant(kMinMargin));
  volume.lower = lo - margin;
  volume.upper = hi + margin;

  const PointIndex index(shaped_vertices);
  const std::size_t gx = static_cast<std::size_t>(resolution[0]);
  const std::size_t gy = static_cast<std::size_t>(resolution[1]);
  const std::size_t gz = static_cast<std::size_t>(resolution[2]);
  volume.voxels.resize(gx * gy * gz);

  // One z-slab per task.
  parallel_for(gz, [&](std::size_t z) {
    WeightAccumulator acc;
    for (std::size_t y = 0; y < gy; ++y) {
      for (std::size_t x = 0; x < gx; ++x) {
        const Eigen::Vector3d c =
            volume.voxel_center(static_cast<int>(x), static_cast<int>(y), static_cast<int>(z));
        acc.clear();
        for (std::uint32_t v : index.nearest(c, kVolumeNeighbors)) {
          const double d = std::max(kDistanceFloor, (shaped_vertices[v] - c).norm());
          acc.add(tpl.skin[v], 1.0 / (d * d));
        }
        volume.voxels[(z * gy + y) * gx + x] = to_vertex_weights(acc.finish());
      }
    }
  });
  return volume;
}

JointWeights sample_weights(const WeightVolume& volume, const Eigen::Vector3d& point) {
  const Eigen::Vector3d p = point.cwiseMax(volume.lower).cwiseMin(volume.upper);
  const Eigen::Vector3d f = (p - volume.lower).cwiseQuotient(volume.voxel_size()) - Eigen::Vector3d::Constant(0.5);

  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const double fa = std::clamp(f[a], 0.0, static_cast<double>(volume.resolution[a] - 1));
    base[a] = std::min(static_cast<int>(std::floor(fa)), volume.resolution[a] - 2);
    frac[a] = fa - base[a];
  }

  WeightAccumulator acc;
  for (int corner = 0; corner < 8; ++corner) {
    double coeff = 1.0;
    int idx[3];
    for (int a = 0; a < 3; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = base[a] + bit;
      coeff *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (coeff == 0.0) continue;
    acc.add(volume.at(idx[0], idx[1], idx[2]), coeff);
  }
  return acc.finish();
}

std::vector<JointWeights> query_weights(const WeightVolume& volume, const AnchorTable& anchors,
                                        const GaussianSet& decoded) {
  if (anchors.size() != decoded.size()) {
    throw Error(ErrorCode::RegionLabelMissing, "anchor table and Gaussian set differ in length");
  }
  std::vector<JointWeights> out(decoded.size());
  parallel_for(decoded.size(), [&](std::size_t k) {
    const Region region = anchors.anchors[k].region;
    switch (region) {
      case Region::Hand:
      case Region::Face:
        out[k] = anchors.anchors[k].weights;
        break;
      case Region::Body:
        out[k] = sample_weights(volume, decoded.mu[k]);
        break;
      default:
        throw Error(ErrorCode::RegionLabelMissing, "anchor " + std::to_string(k) + " has no valid region");
    }
  });
  return out;
}

GaussianSet skin_gaussians(const GaussianSet& g, const JointTransforms& transforms, SkinningStats* stats) {
  const std::size_t n = g.size();
  if (g.weights.size() != n) throw Error(ErrorCode::WeightsMissing, "Gaussian set carries no skin weights");
  const std::size_t J = transforms.matrices.size();

  GaussianSet out = g;
  std::vector<double> residual(n, 0.0);
  parallel_for(n, [&](std::size_t k) {
    const JointWeights& w = g.weights[k];
    Eigen::Matrix4d blend = Eigen::Matrix4d::Zero();
    double total = 0.0;
    for (int i = 0; i < kMaxInfluences; ++i) {
      if (w.weight[i] == 0.0) continue;
      if (w.joint[i] >= J) {
        throw Error(ErrorCode::WeightsMissing, "Gaussian " + std::to_string(k) + " references joint " +
                                                   std::to_string(w.joint[i]));
      }
      blend += w.weight[i] * transforms.matrices[w.joint[i]];
      total += w.weight[i];
    }
    if (!(total > 0.0)) throw Error(ErrorCode::WeightsMissing, "Gaussian " + std::to_string(k) + " has no weight");
    blend /= total;

    out.mu[k] = blend.topLeftCorner<3, 3>() * g.mu[k] + blend.topRightCorner<3, 1>();
    const Eigen::Matrix3d linear = blend.topLeftCorner<3, 3>();
    if (linear == Eigen::Matrix3d::Identity()) return;
    residual[k] = orthonormality_residual(linear);
    const Eigen::Matrix3d rotated = linear * g.rot[k].toRotationMatrix();
    out.rot[k] = quat_from_matrix(nearest_rotation(rotated), g.rot[k]);
  });

  if (stats != nullptr) {
    stats->max_orthonormality_residual = n == 0 ? 0.0 : *std::max_element(residual.begin(), residual.end());
  }
  return out;
}

std::vector<std::uint8_t> encode_volume(const WeightVolume& volume) {
  std::vector<std::uint8_t> data;
  data.reserve(volume.voxels.size() * 24);
  for (const auto& v : volume.voxels) {
    std::array<std::uint16_t, 4> joints{};
    for (int i = 0; i < 4; ++i) joints[i] = static_cast<std::uint16_t>(v.joint[i]);
    const auto jb = container::encode_u16(joints);
    const auto wb = container::encode_f32(v.weight);
    data.insert(data.end(), jb.begin(), jb.end());
    data.insert(data.end(), wb.begin(), wb.end());
  }
  const nlohmann::json header = {
      {"resolution", volume.resolution},
      {"bounds", {{volume.lower.x(), volume.lower.y(), volume.lower.z()},
                  {volume.upper.x(), volume.upper.y(), volume.upper.z()}}}};
  return container::pack(kMagic, header, data);
}

WeightVolume decode_volume(std::span<const std::uint8_t> bytes) {
  const auto section = container::unpack(kMagic, bytes);
  WeightVolume volume;
  try {
    volume.resolution = section.header.at("resolution").get<std::array<int, 3>>();
    const auto bounds = section.header.at("bounds").get<std::array<std::array<double, 3>, 2>>();
    volume.lower = Eigen::Vector3d(bounds[0][0], bounds[0][1], bounds[0][2]);
    volume.upper = Eigen::Vector3d(bounds[1][0], bounds[1][1], bounds[1][2]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("volume header: ") + e.what());
  }
  for (int r : volume.resolution) {
    if (r < 1) throw Error(ErrorCode::Parse, "volume resolution must be positive");
  }
  const std::size_t count = static_cast<std::size_t>(volume.resolution[0]) * volume.resolution[1] *
                            static_cast<std::size_t>(volume.resolution[2]);
  if (section.data.size() != count * 24) {
    throw Error(ErrorCode::CountMismatch, "volume data has " + std::to_string(section.data.size()) +
                                              " bytes, expected " + std::to_string(count * 24));
  }
  volume.voxels.resize(count);
  const std::span<const std::uint8_t> all(section.data);
  for (std::size_t i = 0; i < count; ++i) {
    const auto joints = container::decode_u16(all.subspan(i * 24, 8));
    const auto weights = container::decode_f32(all.subspan(i * 24 + 8, 16));
    for (int j = 0; j < 4; ++j) {
      volume.voxels[i].joint[j] = joints[j];
      volume.voxels[i].weight[j] = weights[j];
    }
  }
  return volume;
}

void save_volume(const WeightVolume& volume, const std::filesystem::path& path) {
  container::write_file(path, encode_volume(volume));
}

WeightVolume load_volume(const std::filesystem::path& path) { return decode_volume(container::read_file(path)); }

}  // namespace avatar
