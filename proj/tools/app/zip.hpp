// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace avatar::app {

struct ZipEntry {
  std::string name;
  std::vector<std::uint8_t> data;
};

/// Uncompressed (stored) archive with fixed timestamps, so identical entries give
/// identical bytes.
std::vector<std::uint8_t> make_zip(const std::vector<ZipEntry>& entries);

}  // namespace avatar::app
