#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fex/error.hpp"
#include "fex/imaging.hpp"
#include "fex/metrics.hpp"
#include "fex/pipeline.hpp"
#include "fex/thresholding.hpp"

namespace fex {

/// Report rows: the 16 methods by index, then the proposed pipeline.
inline constexpr int kProposedRow = static_cast<int>(kMethodCount);
inline constexpr int kRowCount = kProposedRow + 1;
std::string row_label(int row);

struct BenchImage {
  std::string name;
  Image clean;
};

struct BenchPlan {
  std::vector<BenchImage> images;
  std::vector<double> sigmas = {15, 30, 45, 60, 75, 90};
  int seeds = 10;
  std::uint64_t base_seed = 1;  // noise seeds are base_seed .. base_seed + seeds - 1
  std::vector<ThresholdMethod> methods{kAllMethods.begin(), kAllMethods.end()};
  bool include_proposed = true;
  int jobs = 1;
  PipelineConfig pipeline;

  /// Throws InvalidArgument.
  void validate() const;
  std::vector<int> rows() const;
};

/// One (image, row, sigma, seed) evaluation against the clean original.
struct BenchSample {
  int image = 0;
  int row = 0;
  int sigma = 0;  // index into the plan's grid
  std::uint64_t seed = 0;
  std::optional<QualityReport> report;
  ErrorKind error = ErrorKind::Degenerate;
  std::string message;
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single seed
};

/// Aggregate over seeds. A cell with any failed seed is flagged and carries
/// no statistics.
struct BenchCell {
  int image = 0;
  int row = 0;
  int sigma = 0;
  int samples = 0;
  int failures = 0;
  bool psnr_infinite = false;
  Stat psnr, mse, mae, snr;
  bool flagged() const noexcept { return failures > 0 || samples == 0; }
};

struct BenchResult {
  std::vector<std::string> image_names;
  std::vector<double> sigmas;
  std::vector<int> rows;
  std::vector<BenchSample> samples;  // sorted by (image, row, sigma, seed)
  std::vector<BenchCell> cells;      // sorted by (image, row, sigma)

  const BenchCell& cell(int image, int row, int sigma) const;
};

BenchResult run_bench(const BenchPlan& plan);

/// Formats a sigma value as it appears in headers (shortest round trip).
std::string format_sigma(double sigma);

/// `method,<sigma>...` with one row per plan row; 4-decimal PSNR means,
/// `nan` for flagged cells and `inf` for error-free ones.
std::string emit_table(const BenchResult& result, int image = 0);

struct PlotSeries {
  std::string label;
  std::string text;  // `sigma psnr` lines
};
std::vector<PlotSeries> emit_plotdata(const BenchResult& result, int image = 0);

/// `image,method,sigma,seed,mse,mae,snr_db,psnr_db`, one line per sample.
std::string emit_samples_csv(const BenchResult& result);
/// Mean and standard deviation of every metric per cell.
std::string emit_summary_csv(const BenchResult& result);
/// Conventions the numbers depend on.
std::string emit_metadata(const BenchPlan& plan);

/// Writes table, plot series, raw samples, summary and metadata files into
/// `dir` (a subdirectory per image when there is more than one).
void write_bench_outputs(const BenchPlan& plan, const BenchResult& result, const std::filesystem::path& dir);

}  // namespace fex
