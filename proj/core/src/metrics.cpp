// Copyright Contributors to the avatar project
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "avatar/error.hpp"
#include "avatar/fit.hpp"

namespace avatar {

double mse(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.rgb.size() != b.rgb.size()) {
    throw Error(ErrorCode::DimensionMismatch, "images differ in size");
  }
  if (a.rgb.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - static_cast<double>(b.rgb[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.rgb.size());
}

double psnr_from_mse(double mse_value) {
  if (!(mse_value > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse_value));
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

}  // namespace avatar
