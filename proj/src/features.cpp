#include "fex/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fex/error.hpp"

namespace fex {

LocalStats local_stats(const GrayImage& img, int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "window must be a positive odd integer");
  }
  if (window > std::min(img.width(), img.height())) {
    throw Error(ErrorKind::InvalidArgument, "window larger than the image");
  }
  const int w = img.width();
  const int h = img.height();
  const int r = window / 2;
  const auto n = static_cast<std::int64_t>(window) * window;

  LocalStats out{w, h, std::vector<double>(img.size()), std::vector<double>(img.size())};

  // Column sums over the replicated vertical window, slid along each row.
  std::vector<std::int64_t> col_sum(static_cast<std::size_t>(w));
  std::vector<std::int64_t> col_sq(static_cast<std::size_t>(w));
  auto clampx = [w](int x) { return std::clamp(x, 0, w - 1); };
  auto clampy = [h](int y) { return std::clamp(y, 0, h - 1); };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int64_t s = 0, q = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const std::int64_t v = img.at(x, clampy(y + dy));
        s += v;
        q += v * v;
      }
      col_sum[static_cast<std::size_t>(x)] = s;
      col_sq[static_cast<std::size_t>(x)] = q;
    }
    for (int x = 0; x < w; ++x) {
      std::int64_t s = 0, q = 0;
      for (int dx = -r; dx <= r; ++dx) {
        s += col_sum[static_cast<std::size_t>(clampx(x + dx))];
        q += col_sq[static_cast<std::size_t>(clampx(x + dx))];
      }
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      out.mean[i] = static_cast<double>(s) / static_cast<double>(n);
      // n*q - s^2 is exact, so constant windows give exactly zero.
      const std::int64_t spread = n * q - s * s;
      out.stddev[i] = std::sqrt(static_cast<double>(spread)) / static_cast<double>(n);
    }
  }
  return out;
}

FeaturePlane extract_features(const Image& img, const ThresholdMap& thresholds, int window) {
  const GrayImage gray = gray_view(img);
  const LocalStats stats = local_stats(gray, window);

  FeaturePlane plane;
  plane.width = gray.width();
  plane.height = gray.height();
  plane.window = window;
  plane.thresholds.fill(-1);
  for (ThresholdMethod m : kAllMethods) {
    auto it = thresholds.find(m);
    if (it != thresholds.end() && it->second.ok()) {
      plane.thresholds[method_index(m)] = it->second.result->t;
    } else {
      plane.degenerate.set(method_index(m));
    }
  }

  const ColorImage* color = std::get_if<ColorImage>(&img);
  const auto gpx = gray.pixels();
  plane.pixels.resize(gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    FeatureVector& f = plane.pixels[i];
    if (color) {
      f.r = color->plane(Channel::R).pixels()[i];
      f.g = color->plane(Channel::G).pixels()[i];
      f.b = color->plane(Channel::B).pixels()[i];
    } else {
      f.r = f.g = f.b = gpx[i];
    }
    f.local_mean = stats.mean[i];
    f.local_std = stats.stddev[i];
    for (std::size_t m = 0; m < kMethodCount; ++m) {
      const int t = plane.thresholds[m];
      f.threshold_bits.set(m, t >= 0 && gpx[i] > t);
    }
  }
  return plane;
}

std::string features_to_csv(const FeaturePlane& plane) {
  std::ostringstream os;
  os << "x,y,r,g,b,mean,std";
  for (ThresholdMethod m : kAllMethods) os << ',' << to_string(m);
  os << '\n';
  os.precision(6);
  os << std::fixed;
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      const FeatureVector& f = plane.at(x, y);
      os << x << ',' << y << ',' << int{f.r} << ',' << int{f.g} << ',' << int{f.b} << ','
         << f.local_mean << ',' << f.local_std;
      for (std::size_t m = 0; m < kMethodCount; ++m) os << ',' << (f.threshold_bits.test(m) ? 1 : 0);
      os << '\n';
    }
  }
  return os.str();
}

std::size_t RoiMask::count() const {
  return static_cast<std::size_t>(std::count(foreground.begin(), foreground.end(), true));
}

std::vector<RoiMask> roi_masks(const GrayImage& gray, const ThresholdMap& thresholds) {
  std::vector<RoiMask> masks;
  for (const auto& [method, entry] : thresholds) {
    if (!entry.ok()) continue;
    RoiMask mask{gray.width(), gray.height(), method, std::vector<bool>(gray.size())};
    const int t = entry.result->t;
    const auto px = gray.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) mask.foreground[i] = px[i] > t;
    masks.push_back(std::move(mask));
  }
  return masks;
}

RoiMask fuse_decisions(const std::vector<RoiMask>& masks) {
  if (masks.empty()) throw Error(ErrorKind::InvalidArgument, "no masks to fuse");
  const RoiMask& first = masks.front();
  for (const RoiMask& m : masks) {
    if (m.width != first.width || m.height != first.height) {
      throw Error(ErrorKind::DimensionMismatch, "masks differ in size");
    }
  }
  RoiMask out{first.width, first.height, first.source, std::vector<bool>(first.foreground.size())};
  const std::size_t n = masks.size();
  for (std::size_t i = 0; i < out.foreground.size(); ++i) {
    std::size_t votes = 0;
    for (const RoiMask& m : masks) votes += m.foreground[i] ? 1 : 0;
    out.foreground[i] = 2 * votes > n;
  }
  return out;
}

}  // namespace fex
