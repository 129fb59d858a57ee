#include "fex/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "fex/error.hpp"

namespace fex {

namespace {

void check_shape(const GrayImage& a, const GrayImage& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "images differ in size");
  if (a.empty()) throw Error(ErrorKind::InvalidArgument, "empty image");
}

// Sum of squared differences is an exact integer for 8-bit data.
std::uint64_t sum_sq_diff(const GrayImage& a, const GrayImage& b) {
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const int d = int{pa[i]} - int{pb[i]};
    s += static_cast<std::uint64_t>(d * d);
  }
  return s;
}

}  // namespace

std::string format_db(const Decibels& db, int decimals) {
  if (db.infinite) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, db.value);
  return buf;
}

double mse(const GrayImage& a, const GrayImage& b) {
  check_shape(a, b);
  return static_cast<double>(sum_sq_diff(a, b)) / static_cast<double>(a.size());
}

double mae(const GrayImage& a, const GrayImage& b) {
  check_shape(a, b);
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) s += static_cast<std::uint64_t>(std::abs(int{pa[i]} - int{pb[i]}));
  return static_cast<double>(s) / static_cast<double>(a.size());
}

Decibels psnr_from_mse(double mse_value, double peak) {
  if (mse_value == 0.0) return Decibels::inf();
  return {10.0 * std::log10(peak * peak / mse_value), false};
}

Decibels psnr(const GrayImage& a, const GrayImage& b) { return psnr_from_mse(mse(a, b)); }

Decibels psnr_color(const ColorImage& a, const ColorImage& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "images differ in size");
  return psnr(to_luma(a), to_luma(b));
}

Decibels snr(const GrayImage& reference, const GrayImage& test) {
  check_shape(reference, test);
  std::uint64_t power = 0;
  for (std::uint8_t v : reference.pixels()) power += static_cast<std::uint64_t>(v) * v;
  if (power == 0) throw Error(ErrorKind::InvalidArgument, "SNR undefined for an all-zero reference");
  const std::uint64_t err = sum_sq_diff(reference, test);
  if (err == 0) return Decibels::inf();
  return {10.0 * std::log10(static_cast<double>(power) / static_cast<double>(err)), false};
}

QualityReport assess(const GrayImage& reference, const GrayImage& test) {
  QualityReport r;
  r.mse = mse(reference, test);
  r.mae = mae(reference, test);
  r.psnr_db = psnr_from_mse(r.mse);
  r.snr_db = snr(reference, test);
  return r;
}

QualityReport assess(const Image& reference, const Image& test) {
  return assess(gray_view(reference), gray_view(test));
}

}  // namespace fex
