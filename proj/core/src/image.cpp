// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "avatar/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "avatar/error.hpp"
#include "container.hpp"

namespace avatar {
namespace {

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.f, 1.f) * 255.f));
}

void on_png_error(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text != nullptr) *text = message;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

std::vector<std::uint8_t> write_png(int width, int height, int channels, const std::vector<std::uint8_t>& pixels) {
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "PNG encode failed: " + message);
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* buffer = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buffer->insert(buffer->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width * channels);
  }
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

}  // namespace

Image Image::filled(int width, int height, const Eigen::Vector3d& color) {
  Image img;
  img.width = width;
  img.height = height;
  img.rgb.resize(img.pixel_count() * 3);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) img.rgb[3 * p + c] = static_cast<float>(color[c]);
  }
  return img;
}

float linear_to_srgb(float linear) {
  const float v = std::clamp(linear, 0.f, 1.f);
  return v <= 0.0031308f ? 12.92f * v : 1.055f * std::pow(v, 1.f / 2.4f) - 0.055f;
}

float srgb_to_linear(float encoded) {
  const float v = std::clamp(encoded, 0.f, 1.f);
  return v <= 0.04045f ? v / 12.92f : std::pow((v + 0.055f) / 1.055f, 2.4f);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<std::uint8_t> pixels(image.pixel_count() * 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = quantize(linear_to_srgb(image.rgb[i]));
  return write_png(image.width, image.height, 3, pixels);
}

std::vector<std::uint8_t> encode_png(const RgbaImage& image) {
  const std::size_t n = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  std::vector<std::uint8_t> pixels(n * 4);
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) pixels[4 * p + c] = quantize(linear_to_srgb(image.rgba[4 * p + c]));
    pixels[4 * p + 3] = quantize(image.rgba[4 * p + 3]);
  }
  return write_png(image.width, image.height, 4, pixels);
}

RgbaImage decode_png_rgba(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::BadMagic, "not a PNG file");
  }
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  ReadCursor cursor{bytes, 0};
  RgbaImage out;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Parse, "PNG decode failed: " + message);
  }
  png_set_read_fn(png, &cursor, [](png_structp p, png_bytep data, png_size_t len) {
    auto* c = static_cast<ReadCursor*>(png_get_io_ptr(p));
    if (len > c->bytes.size() - c->pos) png_error(p, "unexpected end of PNG data");
    std::memcpy(data, c->bytes.data() + c->pos, len);
    c->pos += len;
  });
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_gray_to_rgb(png);
  png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = pixels.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height);
  out.rgba.resize(n * 4);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const std::uint8_t* src = pixels.data() + stride * y + static_cast<std::size_t>(x) * 4;
      float* dst = out.rgba.data() + (static_cast<std::size_t>(y) * out.width + x) * 4;
      for (int c = 0; c < 3; ++c) dst[c] = srgb_to_linear(src[c] / 255.f);
      dst[3] = src[3] / 255.f;
    }
  }
  return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  const RgbaImage rgba = decode_png_rgba(bytes);
  Image img;
  img.width = rgba.width;
  img.height = rgba.height;
  img.rgb.resize(img.pixel_count() * 3);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) img.rgb[3 * p + c] = rgba.rgba[4 * p + c];
  }
  return img;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  container::write_file(path, encode_png(image));
}

Image load_png(const std::filesystem::path& path) { return decode_png(container::read_file(path)); }

RgbaImage load_png_rgba(const std::filesystem::path& path) {
  return decode_png_rgba(container::read_file(path));
}

}  // namespace avatar
