#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <string>
#include <vector>

#include "fex/imaging.hpp"
#include "fex/thresholding.hpp"

namespace fex {

struct LocalStats {
  int width = 0;
  int height = 0;
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
};

/// window x window neighbourhood statistics with edge replication.
/// The window must be odd and no larger than min(width, height).
LocalStats local_stats(const GrayImage& img, int window);

struct FeatureVector {
  std::uint8_t r = 0, g = 0, b = 0;
  double local_mean = 0.0;
  double local_std = 0.0;
  std::bitset<kMethodCount> threshold_bits;  // bit m: gray pixel > t_m

  bool above(ThresholdMethod m) const { return threshold_bits.test(method_index(m)); }
};

struct FeaturePlane {
  int width = 0;
  int height = 0;
  int window = 0;
  std::vector<FeatureVector> pixels;
  /// Raw thresholds, -1 for methods that failed on this image.
  std::array<int, kMethodCount> thresholds{};
  std::bitset<kMethodCount> degenerate;

  const FeatureVector& at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

/// Local statistics are taken on the gray (luma) plane, which is also what
/// the threshold bits compare against. For gray input r = g = b.
FeaturePlane extract_features(const Image& img, const ThresholdMap& thresholds, int window);

/// One row per pixel: x,y,r,g,b,mean,std followed by the 16 bits.
std::string features_to_csv(const FeaturePlane& plane);

struct RoiMask {
  int width = 0;
  int height = 0;
  ThresholdMethod source = ThresholdMethod::Default;
  std::vector<bool> foreground;

  bool at(int x, int y) const {
    return foreground[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  std::size_t count() const;
};

/// One mask per method that produced a threshold, in method order.
std::vector<RoiMask> roi_masks(const GrayImage& gray, const ThresholdMap& thresholds);

/// Pixel is foreground iff strictly more than half of the masks say so.
/// The result's `source` is meaningless.
RoiMask fuse_decisions(const std::vector<RoiMask>& masks);

}  // namespace fex
