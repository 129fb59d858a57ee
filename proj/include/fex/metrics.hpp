#pragma once

#include <string>

#include "fex/imaging.hpp"

namespace fex {

/// A decibel figure that may be +infinity (zero error). Serialized as the
/// literal `inf`, never as a floating non-finite.
struct Decibels {
  double value = 0.0;
  bool infinite = false;

  static Decibels inf() { return {0.0, true}; }
  friend bool operator==(const Decibels&, const Decibels&) = default;
};

std::string format_db(const Decibels& db, int decimals = 6);

inline constexpr double kPeak8Bit = 255.0;

struct QualityReport {
  double mse = 0.0;
  double mae = 0.0;
  Decibels snr_db;
  Decibels psnr_db;
  double r_peak = kPeak8Bit;
};

double mse(const GrayImage& a, const GrayImage& b);
double mae(const GrayImage& a, const GrayImage& b);

/// 10 log10(R^2 / MSE) with R = 255; infinite when the images are equal.
Decibels psnr(const GrayImage& a, const GrayImage& b);
Decibels psnr_from_mse(double mse, double peak = kPeak8Bit);

/// PSNR of the luma planes.
Decibels psnr_color(const ColorImage& a, const ColorImage& b);

/// 10 log10(mean(ref^2) / MSE(ref, test)). Throws InvalidArgument for an
/// all-zero reference.
Decibels snr(const GrayImage& reference, const GrayImage& test);

/// All four figures, computed on the luma planes for color input.
QualityReport assess(const GrayImage& reference, const GrayImage& test);
QualityReport assess(const Image& reference, const Image& test);

}  // namespace fex
