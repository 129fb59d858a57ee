#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "fex/error.hpp"
#include "fex/imaging.hpp"

namespace fex {

/// Global histogram-based thresholding methods, in report row order.
enum class ThresholdMethod {
  Default,
  Huang,
  Intermodes,
  IsoData,
  Li,
  MaxEntropy,
  Mean,
  MinError,
  Minimum,
  Moments,
  Otsu,
  Percentile,
  RenyiEntropy,
  Shanbhag,
  Triangle,
  Yen,
};

inline constexpr std::size_t kMethodCount = 16;

inline constexpr std::array<ThresholdMethod, kMethodCount> kAllMethods = {
    ThresholdMethod::Default,    ThresholdMethod::Huang,        ThresholdMethod::Intermodes,
    ThresholdMethod::IsoData,    ThresholdMethod::Li,           ThresholdMethod::MaxEntropy,
    ThresholdMethod::Mean,       ThresholdMethod::MinError,     ThresholdMethod::Minimum,
    ThresholdMethod::Moments,    ThresholdMethod::Otsu,         ThresholdMethod::Percentile,
    ThresholdMethod::RenyiEntropy, ThresholdMethod::Shanbhag,   ThresholdMethod::Triangle,
    ThresholdMethod::Yen,
};

std::string_view to_string(ThresholdMethod m);
std::optional<ThresholdMethod> parse_method(std::string_view name);

inline std::size_t method_index(ThresholdMethod m) { return static_cast<std::size_t>(m); }

class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(const std::array<std::uint64_t, kGrayLevels>& bins);

  std::uint64_t operator[](int v) const { return bins_[static_cast<std::size_t>(v)]; }
  const std::array<std::uint64_t, kGrayLevels>& bins() const noexcept { return bins_; }
  std::uint64_t total() const noexcept { return total_; }

  /// -1 when the histogram is empty.
  int first_populated() const noexcept;
  int last_populated() const noexcept;
  int populated_count() const noexcept;

 private:
  std::array<std::uint64_t, kGrayLevels> bins_{};
  std::uint64_t total_ = 0;
};

/// Throws ErrorKind::InvalidArgument on an image with no pixels.
Histogram histogram(const GrayImage& img);

/// Background is `v <= t`, foreground `v > t`.
struct ThresholdResult {
  ThresholdMethod method = ThresholdMethod::Default;
  int t = 0;
  bool converged = true;
};

/// Relative tolerance under which two criterion values count as tied; ties
/// resolve to the lowest threshold.
inline constexpr double kCriterionTieTolerance = 1e-12;

/// Every method needs at least two populated bins (otherwise there is no
/// class split) and throws ErrorKind::Degenerate when that fails. MinError
/// also throws Degenerate when no split leaves both classes with positive
/// variance. Intermodes and Minimum throw ErrorKind::NonConvergent when the
/// histogram does not smooth to two modes. IsoData reports converged=false
/// instead of throwing when it hits its iteration cap.
///
/// Returned thresholds always satisfy first_populated <= t < last_populated.
ThresholdResult compute_threshold(const Histogram& hist, ThresholdMethod method);

struct ThresholdEntry {
  std::optional<ThresholdResult> result;
  ErrorKind error = ErrorKind::Degenerate;
  std::string message;

  bool ok() const noexcept { return result.has_value(); }
};

/// One entry per method; per-method failures are recorded, never thrown.
using ThresholdMap = std::map<ThresholdMethod, ThresholdEntry>;

ThresholdMap threshold_all(const Histogram& hist);
ThresholdMap threshold_all(const GrayImage& img);

/// `v > t` maps to 255, everything else to 0.
GrayImage apply_threshold(const GrayImage& img, int t);

/// `method,t,converged` with a header line; failed entries print `nan,false`.
std::string to_csv(const ThresholdMap& map);

namespace detail {

/// Maximizers of the Renyi sum-of-class-entropies for alpha = 0.5, 1, 2,
/// in that order, before the combination step.
std::array<int, 3> renyi_component_thresholds(const Histogram& hist);

}  // namespace detail

}  // namespace fex
