// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include "container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "avatar/error.hpp"

namespace avatar::container {
namespace {

template <typename T>
std::vector<std::uint8_t> encode(std::span<const T> values) {
  std::vector<std::uint8_t> out(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(values[i]);
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      out[i * sizeof(T) + b] = static_cast<std::uint8_t>((bits >> (8 * b)) & 0xFFu);
    }
  }
  return out;
}

template <typename T>
std::vector<T> decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % sizeof(T) != 0) {
    throw Error(ErrorCode::CountMismatch, "buffer length is not a multiple of the element size");
  }
  std::vector<T> out(bytes.size() / sizeof(T));
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  for (std::size_t i = 0; i < out.size(); ++i) {
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bits |= static_cast<U>(static_cast<U>(bytes[i * sizeof(T) + b]) << (8 * b));
    }
    out[i] = std::bit_cast<T>(bits);
  }
  return out;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xFFu));
}

}  // namespace

std::vector<std::uint8_t> encode_f32(std::span<const float> values) { return encode(values); }
std::vector<std::uint8_t> encode_u32(std::span<const std::uint32_t> values) { return encode(values); }
std::vector<std::uint8_t> encode_i32(std::span<const std::int32_t> values) { return encode(values); }
std::vector<std::uint8_t> encode_u16(std::span<const std::uint16_t> values) { return encode(values); }

std::vector<float> decode_f32(std::span<const std::uint8_t> bytes) { return decode<float>(bytes); }
std::vector<std::uint32_t> decode_u32(std::span<const std::uint8_t> bytes) {
  return decode<std::uint32_t>(bytes);
}
std::vector<std::int32_t> decode_i32(std::span<const std::uint8_t> bytes) {
  return decode<std::int32_t>(bytes);
}
std::vector<std::uint16_t> decode_u16(std::span<const std::uint8_t> bytes) {
  return decode<std::uint16_t>(bytes);
}

std::vector<std::uint8_t> pack(std::string_view magic, const nlohmann::json& header,
                               std::span<const std::uint8_t> data) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(magic.begin(), magic.end());
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.resize(align_up(out.size()), 0);
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

Section unpack(std::string_view magic, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < magic.size() ||
      std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw Error(ErrorCode::BadMagic, "expected magic '" + std::string(magic.substr(0, 5)) + "'");
  }
  std::size_t pos = magic.size();
  if (bytes.size() < pos + 8) throw Error(ErrorCode::CountMismatch, "truncated header length");
  std::uint64_t len = 0;
  for (int b = 0; b < 8; ++b) len |= static_cast<std::uint64_t>(bytes[pos + b]) << (8 * b);
  pos += 8;
  if (len > bytes.size() - pos) throw Error(ErrorCode::CountMismatch, "header runs past end of file");

  Section section;
  try {
    section.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                           bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("header JSON: ") + e.what());
  }
  const std::size_t data_start = align_up(pos + len);
  if (data_start < bytes.size()) {
    section.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(data_start), bytes.end());
  }
  return section;
}

std::size_t append_aligned(std::vector<std::uint8_t>& data, std::span<const std::uint8_t> bytes) {
  data.resize(align_up(data.size()), 0);
  const std::size_t offset = data.size();
  data.insert(data.end(), bytes.begin(), bytes.end());
  return offset;
}

std::span<const std::uint8_t> slice(const Section& section, std::size_t offset, std::size_t len,
                                    std::string_view what) {
  if (offset > section.data.size() || len > section.data.size() - offset) {
    throw Error(ErrorCode::CountMismatch,
                "buffer '" + std::string(what) + "' exceeds the data section (offset " +
                    std::to_string(offset) + ", len " + std::to_string(len) + ", data " +
                    std::to_string(section.data.size()) + ")");
  }
  return std::span<const std::uint8_t>(section.data).subspan(offset, len);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

}  // namespace avatar::container
