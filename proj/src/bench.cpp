#include "fex/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

namespace fex {

namespace {

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::string cell_psnr(const BenchCell& c) {
  if (c.flagged()) return "nan";
  if (c.psnr_infinite) return "inf";
  return fixed(c.psnr.mean, 4);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

// Work unit: one noisy realisation, shared by every row.
struct Unit {
  int image;
  int sigma;
  std::uint64_t seed;
};

void run_unit(const BenchPlan& plan, const Unit& u, const std::vector<int>& rows, BenchSample* out) {
  const Image& clean = plan.images[static_cast<std::size_t>(u.image)].clean;
  const GrayImage clean_gray = gray_view(clean);
  const Image noisy = add_gaussian_noise(clean, NoiseSpec{plan.sigmas[static_cast<std::size_t>(u.sigma)], u.seed});
  const GrayImage noisy_gray = gray_view(noisy);

  std::optional<ThresholdMap> thresholds;
  std::optional<Error> threshold_error;
  try {
    thresholds = threshold_all(noisy_gray);
  } catch (const Error& e) {
    threshold_error = e;
  }

  for (std::size_t r = 0; r < rows.size(); ++r) {
    BenchSample& s = out[r];
    s.image = u.image;
    s.row = rows[r];
    s.sigma = u.sigma;
    s.seed = u.seed;
    try {
      if (threshold_error) throw *threshold_error;
      if (rows[r] == kProposedRow) {
        const ExtractionRun run = run_extraction(noisy, plan.pipeline);
        s.report = assess(clean, run.output);
      } else {
        const ThresholdEntry& entry = thresholds->at(static_cast<ThresholdMethod>(rows[r]));
        if (!entry.ok()) throw Error(entry.error, entry.message);
        s.report = assess(clean_gray, apply_threshold(noisy_gray, entry.result->t));
      }
    } catch (const Error& e) {
      s.report.reset();
      s.error = e.kind();
      s.message = e.what();
    }
  }
}

BenchCell aggregate(const BenchSample* first, std::size_t n) {
  BenchCell c;
  c.image = first->image;
  c.row = first->row;
  c.sigma = first->sigma;
  std::vector<double> psnr, mse_v, mae_v, snr_v;
  for (std::size_t i = 0; i < n; ++i) {
    const BenchSample& s = first[i];
    ++c.samples;
    if (!s.report) {
      ++c.failures;
      continue;
    }
    if (s.report->psnr_db.infinite) {
      c.psnr_infinite = true;
    } else {
      psnr.push_back(s.report->psnr_db.value);
    }
    mse_v.push_back(s.report->mse);
    mae_v.push_back(s.report->mae);
    snr_v.push_back(s.report->snr_db.infinite ? HUGE_VAL : s.report->snr_db.value);
  }
  c.psnr = stat_of(psnr);
  c.mse = stat_of(mse_v);
  c.mae = stat_of(mae_v);
  c.snr = stat_of(snr_v);
  return c;
}

}  // namespace

std::string row_label(int row) {
  if (row == kProposedRow) return "Proposed";
  if (row < 0 || row > kProposedRow) throw Error(ErrorKind::InvalidArgument, "bad report row");
  return std::string(to_string(static_cast<ThresholdMethod>(row)));
}

void BenchPlan::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (images.empty()) fail("bench plan has no images");
  if (sigmas.empty()) fail("sigma grid is empty");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!std::isfinite(sigmas[i]) || sigmas[i] < 0.0) fail("sigma values must be finite and >= 0");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) fail("sigma grid must be strictly increasing");
  }
  if (seeds < 1) fail("seeds must be >= 1");
  if (jobs < 1) fail("jobs must be >= 1");
  if (methods.empty() && !include_proposed) fail("bench plan has no rows");
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      if (images[i].name == images[j].name) fail("duplicate image name '" + images[i].name + "'");
    }
  }
  if (include_proposed) pipeline.validate();
}

std::vector<int> BenchPlan::rows() const {
  std::vector<int> out;
  for (ThresholdMethod m : methods) out.push_back(static_cast<int>(method_index(m)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (include_proposed) out.push_back(kProposedRow);
  return out;
}

const BenchCell& BenchResult::cell(int image, int row, int sigma) const {
  const auto it = std::find_if(cells.begin(), cells.end(), [&](const BenchCell& c) {
    return c.image == image && c.row == row && c.sigma == sigma;
  });
  if (it == cells.end()) throw Error(ErrorKind::InvalidArgument, "no such bench cell");
  return *it;
}

BenchResult run_bench(const BenchPlan& plan) {
  plan.validate();
  BenchResult result;
  for (const auto& img : plan.images) result.image_names.push_back(img.name);
  result.sigmas = plan.sigmas;
  result.rows = plan.rows();
  const std::size_t n_rows = result.rows.size();

  std::vector<Unit> units;
  for (int i = 0; i < static_cast<int>(plan.images.size()); ++i) {
    for (int s = 0; s < static_cast<int>(plan.sigmas.size()); ++s) {
      for (int k = 0; k < plan.seeds; ++k) {
        units.push_back({i, s, plan.base_seed + static_cast<std::uint64_t>(k)});
      }
    }
  }

  // Unit u writes rows [u * n_rows, (u + 1) * n_rows), so the layout is
  // fixed before any thread starts.
  std::vector<BenchSample> by_unit(units.size() * n_rows);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t u = next.fetch_add(1);
      if (u >= units.size()) return;
      try {
        run_unit(plan, units[u], result.rows, &by_unit[u * n_rows]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(plan.jobs, static_cast<int>(std::max<std::size_t>(units.size(), 1)));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  result.samples = std::move(by_unit);
  std::stable_sort(result.samples.begin(), result.samples.end(), [](const BenchSample& a, const BenchSample& b) {
    return std::tie(a.image, a.row, a.sigma, a.seed) < std::tie(b.image, b.row, b.sigma, b.seed);
  });
  const auto seeds = static_cast<std::size_t>(plan.seeds);
  for (std::size_t i = 0; i < result.samples.size(); i += seeds) {
    result.cells.push_back(aggregate(&result.samples[i], seeds));
  }
  return result;
}

std::string format_sigma(double sigma) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, sigma);
  return std::string(buf, res.ptr);
}

std::string emit_table(const BenchResult& result, int image) {
  std::string out = "method";
  for (double s : result.sigmas) out += "," + format_sigma(s);
  out += '\n';
  for (int row : result.rows) {
    out += row_label(row);
    for (int s = 0; s < static_cast<int>(result.sigmas.size()); ++s) out += "," + cell_psnr(result.cell(image, row, s));
    out += '\n';
  }
  return out;
}

std::vector<PlotSeries> emit_plotdata(const BenchResult& result, int image) {
  std::vector<PlotSeries> out;
  for (int row : result.rows) {
    PlotSeries series{row_label(row), "# sigma psnr_db\n"};
    for (int s = 0; s < static_cast<int>(result.sigmas.size()); ++s) {
      series.text += format_sigma(result.sigmas[static_cast<std::size_t>(s)]) + " " +
                     cell_psnr(result.cell(image, row, s)) + "\n";
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::string emit_samples_csv(const BenchResult& result) {
  std::string out = "image,method,sigma,seed,mse,mae,snr_db,psnr_db\n";
  for (const BenchSample& s : result.samples) {
    out += result.image_names[static_cast<std::size_t>(s.image)] + "," + row_label(s.row) + "," +
           format_sigma(result.sigmas[static_cast<std::size_t>(s.sigma)]) + "," + std::to_string(s.seed) + ",";
    if (s.report) {
      out += fixed(s.report->mse, 6) + "," + fixed(s.report->mae, 6) + "," + format_db(s.report->snr_db) + "," +
             format_db(s.report->psnr_db);
    } else {
      out += "nan,nan,nan,nan";
    }
    out += '\n';
  }
  return out;
}

std::string emit_summary_csv(const BenchResult& result) {
  std::string out =
      "image,method,sigma,seeds,failures,psnr_mean,psnr_std,mse_mean,mse_std,mae_mean,mae_std,snr_mean,snr_std\n";
  for (const BenchCell& c : result.cells) {
    out += result.image_names[static_cast<std::size_t>(c.image)] + "," + row_label(c.row) + "," +
           format_sigma(result.sigmas[static_cast<std::size_t>(c.sigma)]) + "," + std::to_string(c.samples) + "," +
           std::to_string(c.failures) + ",";
    if (c.flagged()) {
      out += "nan,nan,nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    out += cell_psnr(c) + "," + (c.psnr_infinite ? "nan" : fixed(c.psnr.stddev, 4)) + "," + fixed(c.mse.mean, 6) +
           "," + fixed(c.mse.stddev, 6) + "," + fixed(c.mae.mean, 6) + "," + fixed(c.mae.stddev, 6) + "," +
           fixed(c.snr.mean, 6) + "," + fixed(c.snr.stddev, 6) + "\n";
  }
  return out;
}

std::string emit_metadata(const BenchPlan& plan) {
  std::ostringstream os;
  os << "psnr_reference=clean_original\n";
  os << "psnr_test=extracted\n";
  os << "baseline_output=binary_0_255_on_luma\n";
  os << "proposed_output=grayscale\n";
  os << "color_psnr=luma\n";
  os << "peak=255\n";
  os << "sigma_units=intensity_std_dev\n";
  os << "noise=per_channel_additive_gaussian_rounded_clamped\n";
  os << "seeds=" << plan.seeds << '\n';
  os << "base_seed=" << plan.base_seed << '\n';
  os << "sigmas=";
  for (std::size_t i = 0; i < plan.sigmas.size(); ++i) os << (i ? "," : "") << format_sigma(plan.sigmas[i]);
  os << '\n';
  os << "images=";
  for (std::size_t i = 0; i < plan.images.size(); ++i) os << (i ? "," : "") << plan.images[i].name;
  os << '\n';
  if (plan.include_proposed) {
    os << "# pipeline\n" << to_text(plan.pipeline);
  }
  return os.str();
}

void write_bench_outputs(const BenchPlan& plan, const BenchResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "samples.csv", emit_samples_csv(result));
  write_text(dir / "summary.csv", emit_summary_csv(result));
  write_text(dir / "metadata.txt", emit_metadata(plan));
  for (int i = 0; i < static_cast<int>(result.image_names.size()); ++i) {
    const auto sub = result.image_names.size() > 1 ? dir / result.image_names[static_cast<std::size_t>(i)] : dir;
    std::filesystem::create_directories(sub / "plot", ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + (sub / "plot").string() + ": " + ec.message());
    write_text(sub / "table.csv", emit_table(result, i));
    for (const PlotSeries& s : emit_plotdata(result, i)) write_text(sub / "plot" / (s.label + ".dat"), s.text);
  }
}

}  // namespace fex
