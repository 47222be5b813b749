// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace avatar {

/// Linear RGB, row-major, three floats per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;

  static Image filled(int width, int height, const Eigen::Vector3d& color);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  float& at(int x, int y, int c) { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const { return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Straight-alpha RGBA with linear color, row-major.
struct RgbaImage {
  int width = 0;
  int height = 0;
  std::vector<float> rgba;
};

float linear_to_srgb(float linear);
float srgb_to_linear(float encoded);

/// 8-bit sRGB PNG. Encoding is deterministic for identical images.
std::vector<std::uint8_t> encode_png(const Image& image);
/// RGBA PNG; color is sRGB-encoded, alpha is stored linearly.
std::vector<std::uint8_t> encode_png(const RgbaImage& image);

/// Any 8- or 16-bit PNG, converted to linear RGB(A). Missing alpha reads as 1.
RgbaImage decode_png_rgba(std::span<const std::uint8_t> bytes);
Image decode_png(std::span<const std::uint8_t> bytes);

void save_png(const Image& image, const std::filesystem::path& path);
Image load_png(const std::filesystem::path& path);
RgbaImage load_png_rgba(const std::filesystem::path& path);

}  // namespace avatar
