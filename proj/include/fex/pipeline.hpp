#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fex/features.hpp"
#include "fex/fuzzy_core.hpp"
#include "fex/imaging.hpp"
#include "fex/thresholding.hpp"

namespace fex {

/// Per-pixel quantities that can feed the rule base.
enum class Feature { Intensity, LocalMean, LocalStd, Membership };

std::string_view to_string(Feature f);
std::optional<Feature> parse_feature(std::string_view name);

enum class FallbackPolicy {
  ClassMean,  // local mean over window pixels sharing the fused class
  Fused,      // foreground -> local mean, background -> 0
};

struct PipelineConfig {
  int window = 3;
  std::optional<double> fuzzifier;  // default: half the intensity std-dev
  std::vector<Feature> variables = {Feature::Intensity, Feature::LocalMean, Feature::LocalStd};
  std::vector<int> region_counts = {15, 15, 7};
  int output_regions = 15;
  bool anchors = true;  // intensity partition peaks at the threshold values
  FallbackPolicy fallback = FallbackPolicy::ClassMean;
  int sample_stride = 4;
  /// Phase of the training sample grid: x offset seed % stride, y offset
  /// (seed / stride) % stride.
  std::uint64_t seed = 0;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Applies one `key=value` setting. Keys: window, fuzzifier, variables,
/// regions, output_regions, anchors, fallback, sample_stride, seed.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Flat `key=value` lines; blank lines and `#` comments are ignored.
PipelineConfig parse_config(std::string_view text);
std::string to_text(const PipelineConfig& cfg);

struct StageTimings {
  double thresholds_ms = 0.0;
  double features_ms = 0.0;
  double rules_ms = 0.0;
  double inference_ms = 0.0;
};

struct ExtractionRun {
  PipelineConfig config;
  ThresholdMap thresholds;
  RoiMask fused;
  double fuzzifier = 0.0;
  FuzzyImage membership;
  std::shared_ptr<const RuleBase> rules;
  Image output;
  StageTimings timings;
  std::size_t training_pairs = 0;
  std::size_t fallback_pixels = 0;
};

/// Noisy image in, reconstructed image out:
///  1. thresholds of every method on the gray/luma plane, ROI masks and
///     their majority fusion;
///  2. per-pixel features and the Gaussian membership plane;
///  3. partitions (intensity anchored at the thresholds when enabled);
///  4. Wang-Mendel rules from a strided sample, each sample's target being
///     the mean of its window restricted to pixels of its fused class;
///  5. Mamdani inference + centroid per pixel, rounded to an intensity.
/// Color input reuses the luma rule base on each channel, with that
/// channel's plane standing in for the gray plane.
///
/// Throws Degenerate when no threshold method succeeds on the image.
ExtractionRun run_extraction(const Image& noisy, const PipelineConfig& cfg);

/// Binary extraction by a single method on the gray/luma plane.
GrayImage run_baseline(const Image& noisy, ThresholdMethod method);

/// Mean of the window x window neighbourhood (edge replicated) over pixels
/// whose fused class matches the centre pixel's.
std::vector<double> class_local_mean(const GrayImage& img, const RoiMask& fused, int window);

std::string summary_csv_header();
std::string summary_csv_row(const ExtractionRun& run, std::string_view image_name);

}  // namespace fex
