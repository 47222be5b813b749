// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <string>

#include "avatar/error.hpp"
#include "avatar/parallel.hpp"
#include "avatar/uv_gaussians.hpp"
#include "container.hpp"

namespace avatar {
namespace {

constexpr std::string_view kMagic = "GAM01\n";

struct PlaneSpec {
  const char* name;
  int channels;
};
constexpr PlaneSpec kPlanes[] = {{"delta_mu", 3}, {"delta_s_log", 3}, {"delta_r", 4},
                                 {"color", 3},    {"opacity", 1},     {"mask", 1}};

std::vector<float>* float_plane(GaussianAttributeMaps& maps, std::string_view name) {
  if (name == "delta_mu") return &maps.delta_mu;
  if (name == "delta_s_log") return &maps.delta_s_log;
  if (name == "delta_r") return &maps.delta_r;
  if (name == "color") return &maps.color;
  if (name == "opacity") return &maps.opacity;
  return nullptr;
}

const std::vector<float>* float_plane(const GaussianAttributeMaps& maps, std::string_view name) {
  return float_plane(const_cast<GaussianAttributeMaps&>(maps), name);
}

void check_plane_sizes(const GaussianAttributeMaps& maps) {
  const std::size_t n = maps.texel_count();
  for (const auto& spec : kPlanes) {
    const std::size_t expected = n * static_cast<std::size_t>(spec.channels);
    const std::size_t actual =
        std::string_view(spec.name) == "mask" ? maps.mask.size() : float_plane(maps, spec.name)->size();
    if (actual != expected) {
      throw Error(ErrorCode::PlaneSizeMismatch, std::string("plane '") + spec.name + "' has " +
                                                    std::to_string(actual) + " values, expected " +
                                                    std::to_string(expected));
    }
  }
}

float clamp_unit(float v, std::size_t& counter) {
  if (v < 0.f || v > 1.f) {
    ++counter;
    return std::clamp(v, 0.f, 1.f);
  }
  return v;
}

}  // namespace

std::size_t GaussianAttributeMaps::valid_count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

GaussianAttributeMaps default_maps(const AnchorTable& anchors, const Eigen::Vector3f& base_color) {
  GaussianAttributeMaps maps;
  maps.width = anchors.width;
  maps.height = anchors.height;
  const std::size_t n = maps.texel_count();
  maps.delta_mu.assign(n * 3, 0.f);
  maps.delta_s_log.assign(n * 3, 0.f);
  maps.delta_r.assign(n * 4, 0.f);
  for (std::size_t t = 0; t < n; ++t) maps.delta_r[4 * t] = 1.f;
  maps.color.resize(n * 3);
  for (std::size_t t = 0; t < n; ++t) {
    for (int c = 0; c < 3; ++c) maps.color[3 * t + c] = std::clamp(base_color[c], 0.f, 1.f);
  }
  maps.opacity.assign(n, 1.f);
  maps.mask.assign(n, 0);
  for (const auto& a : anchors.anchors) maps.mask[a.texel] = 1;
  return maps;
}

MapLoadReport sanitize_maps(GaussianAttributeMaps& maps) {
  check_plane_sizes(maps);
  MapLoadReport report;
  const std::size_t n = maps.texel_count();
  for (std::size_t t = 0; t < n; ++t) {
    if (maps.mask[t] != 0) {
      float* q = &maps.delta_r[4 * t];
      const double norm = std::sqrt(double(q[0]) * q[0] + double(q[1]) * q[1] + double(q[2]) * q[2] +
                                    double(q[3]) * q[3]);
      if (!(norm > 1e-12) || !std::isfinite(norm)) {
        q[0] = 1.f;
        q[1] = q[2] = q[3] = 0.f;
        ++report.rotations_normalized;
      } else if (std::abs(norm - 1.0) > 1e-6) {
        for (int c = 0; c < 4; ++c) q[c] = static_cast<float>(q[c] / norm);
        ++report.rotations_normalized;
      }
    }
    for (int c = 0; c < 3; ++c) maps.color[3 * t + c] = clamp_unit(maps.color[3 * t + c], report.color_clamped);
    maps.opacity[t] = clamp_unit(maps.opacity[t], report.opacity_clamped);
  }
  return report;
}

std::vector<std::uint8_t> encode_maps(const GaussianAttributeMaps& maps) {
  check_plane_sizes(maps);
  std::vector<std::uint8_t> data;
  nlohmann::json names = nlohmann::json::array();
  for (const auto& spec : kPlanes) {
    names.push_back(spec.name);
    if (std::string_view(spec.name) == "mask") {
      container::append_aligned(data, maps.mask);
    } else {
      container::append_aligned(data, container::encode_f32(*float_plane(maps, spec.name)));
    }
  }
  const nlohmann::json header = {{"width", maps.width}, {"height", maps.height}, {"planes", names}};
  return container::pack(kMagic, header, data);
}

GaussianAttributeMaps decode_maps(std::span<const std::uint8_t> bytes, MapLoadReport* report) {
  const auto section = container::unpack(kMagic, bytes);
  GaussianAttributeMaps maps;
  std::vector<std::string> names;
  try {
    maps.width = section.header.at("width").get<int>();
    maps.height = section.header.at("height").get<int>();
    names = section.header.at("planes").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("map header: ") + e.what());
  }
  if (maps.width < 0 || maps.height < 0) throw Error(ErrorCode::Parse, "negative map dimensions");

  const std::size_t n = maps.texel_count();
  std::size_t offset = 0;
  for (const auto& name : names) {
    const PlaneSpec* spec = nullptr;
    for (const auto& s : kPlanes) {
      if (name == s.name) spec = &s;
    }
    if (spec == nullptr) throw Error(ErrorCode::Parse, "unknown plane '" + name + "'");
    offset = container::align_up(offset);
    const std::size_t element = name == "mask" ? 1 : 4;
    const std::size_t len = n * static_cast<std::size_t>(spec->channels) * element;
    if (offset > section.data.size() || len > section.data.size() - offset) {
      throw Error(ErrorCode::PlaneSizeMismatch, "plane '" + name + "' is truncated");
    }
    const auto raw = std::span<const std::uint8_t>(section.data).subspan(offset, len);
    if (name == "mask") {
      maps.mask.assign(raw.begin(), raw.end());
    } else {
      *float_plane(maps, name) = container::decode_f32(raw);
    }
    offset += len;
  }
  if (offset != section.data.size()) {
    throw Error(ErrorCode::PlaneSizeMismatch, "trailing bytes after the last plane");
  }

  const MapLoadReport r = sanitize_maps(maps);
  if (report != nullptr) *report = r;
  return maps;
}

void save_maps(const GaussianAttributeMaps& maps, const std::filesystem::path& path) {
  container::write_file(path, encode_maps(maps));
}

GaussianAttributeMaps load_maps(const std::filesystem::path& path, MapLoadReport* report) {
  return decode_maps(container::read_file(path), report);
}

void GaussianSet::resize(std::size_t n) {
  mu.resize(n);
  scale.resize(n);
  rot.resize(n);
  color.resize(n);
  alpha.resize(n);
  weights.resize(n);
}

GaussianSet decode_gaussians(const AnchorTable& anchors, const GaussianAttributeMaps& maps) {
  if (maps.width != anchors.width || maps.height != anchors.height) {
    throw Error(ErrorCode::ResolutionMismatch,
                "maps are " + std::to_string(maps.width) + "x" + std::to_string(maps.height) +
                    ", anchors were built at " + std::to_string(anchors.width) + "x" +
                    std::to_string(anchors.height));
  }
  if (anchors.anchors.empty()) throw Error(ErrorCode::InvalidArgument, "anchor table is empty");
  check_plane_sizes(maps);
  if (maps.valid_count() != anchors.size()) {
    throw Error(ErrorCode::InvalidArgument, "map mask has " + std::to_string(maps.valid_count()) +
                                                " valid texels, anchor table has " + std::to_string(anchors.size()));
  }
  for (const auto& a : anchors.anchors) {
    if (maps.mask[a.texel] == 0) {
      throw Error(ErrorCode::InvalidArgument, "map mask disagrees with the anchor table at texel " +
                                                  std::to_string(a.texel));
    }
  }

  GaussianSet g;
  g.resize(anchors.size());
  parallel_for(anchors.size(), [&](std::size_t k) {
    const Anchor& a = anchors.anchors[k];
    const std::size_t t = a.texel;
    const Eigen::Vector3d d_mu(maps.delta_mu[3 * t], maps.delta_mu[3 * t + 1], maps.delta_mu[3 * t + 2]);
    const Eigen::Vector3d d_s(maps.delta_s_log[3 * t], maps.delta_s_log[3 * t + 1], maps.delta_s_log[3 * t + 2]);
    const Eigen::Quaterniond d_r(maps.delta_r[4 * t], maps.delta_r[4 * t + 1], maps.delta_r[4 * t + 2],
                                 maps.delta_r[4 * t + 3]);
    g.mu[k] = a.position + d_mu;
    g.scale[k] = a.scale.cwiseProduct(d_s.array().exp().matrix());
    g.rot[k] = (a.rotation * d_r).normalized();
    g.color[k] = Eigen::Vector3d(maps.color[3 * t], maps.color[3 * t + 1], maps.color[3 * t + 2]);
    g.alpha[k] = maps.opacity[t];
    g.weights[k] = a.weights;
  });
  return g;
}

}  // namespace avatar
