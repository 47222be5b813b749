// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared layout of the engine's binary asset files (.btpl, .gam, .wvol):
//
//   bytes 0-5   magic, five ASCII characters followed by '\n'
//   bytes 6-13  little-endian u64 header length in bytes
//   header      UTF-8 JSON
//   padding     zeros up to the next 16-byte boundary (file offset)
//   data        raw little-endian buffers, each starting 16-byte aligned
//
// Buffer offsets are relative to the start of the data section.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace avatar::container {

inline constexpr std::size_t kAlignment = 16;

constexpr std::size_t align_up(std::size_t n) {
  return (n + kAlignment - 1) / kAlignment * kAlignment;
}

/// Raw little-endian encoding of typed arrays.
std::vector<std::uint8_t> encode_f32(std::span<const float> values);
std::vector<std::uint8_t> encode_u32(std::span<const std::uint32_t> values);
std::vector<std::uint8_t> encode_i32(std::span<const std::int32_t> values);
std::vector<std::uint8_t> encode_u16(std::span<const std::uint16_t> values);

std::vector<float> decode_f32(std::span<const std::uint8_t> bytes);
std::vector<std::uint32_t> decode_u32(std::span<const std::uint8_t> bytes);
std::vector<std::int32_t> decode_i32(std::span<const std::uint8_t> bytes);
std::vector<std::uint16_t> decode_u16(std::span<const std::uint8_t> bytes);

struct Section {
  nlohmann::json header;
  std::vector<std::uint8_t> data;  // the data section, header already stripped
};

/// Serializes magic + header + data into one byte string.
std::vector<std::uint8_t> pack(std::string_view magic, const nlohmann::json& header,
                               std::span<const std::uint8_t> data);

/// Splits a file image into header and data. Throws BadMagic on a wrong prefix and
/// CountMismatch when the header length runs past the end of the buffer.
Section unpack(std::string_view magic, std::span<const std::uint8_t> bytes);

/// Appends `bytes` to `data` at the next aligned offset and returns that offset.
std::size_t append_aligned(std::vector<std::uint8_t>& data, std::span<const std::uint8_t> bytes);

/// Bounds-checked view of `len` bytes at `offset` of the data section.
std::span<const std::uint8_t> slice(const Section& section, std::size_t offset, std::size_t len,
                                    std::string_view what);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace avatar::container
