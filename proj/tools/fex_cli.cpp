// Command-line front end: bench, extract, threshold, metrics, noise,
// make-testimage. Failures print one `error: <kind>: <message>` line on
// stderr and exit nonzero.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fex/bench.hpp"
#include "fex/error.hpp"
#include "fex/imaging.hpp"
#include "fex/metrics.hpp"
#include "fex/pipeline.hpp"
#include "fex/rule_io.hpp"
#include "fex/synthetic.hpp"
#include "fex/thresholding.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fex::Error(fex::ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw fex::Error(fex::ErrorKind::Io, "cannot write " + path.string());
}

std::vector<double> parse_sigmas(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw fex::Error(fex::ErrorKind::InvalidArgument, "bad sigma '" + item + "'");
    }
  }
  return out;
}

fex::PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  fex::PipelineConfig cfg = path.empty() ? fex::PipelineConfig{} : fex::parse_config(read_text(path));
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fex::Error(fex::ErrorKind::InvalidArgument, "--set expects key=value");
    fex::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

fex::ThresholdMethod method_or_throw(const std::string& name) {
  auto m = fex::parse_method(name);
  if (!m) throw fex::Error(fex::ErrorKind::InvalidArgument, "unknown threshold method '" + name + "'");
  return *m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy-rule image extraction and thresholding benchmark"};
  app.require_subcommand(1);

  // bench run
  auto* bench = app.add_subcommand("bench", "Noise/method PSNR grid");
  bench->require_subcommand(1);
  auto* bench_run = bench->add_subcommand("run", "Run the grid and write CSV tables");
  std::vector<std::string> bench_images;
  std::string sigmas_text = "15,30,45,60,75,90";
  int seeds = 10;
  std::uint64_t base_seed = 1;
  std::string bench_out;
  int jobs = 1;
  std::string bench_config;
  std::vector<std::string> bench_sets;
  std::string bench_methods = "all";
  bool no_proposed = false;
  bench_run->add_option("--image", bench_images, "Clean input image (repeatable)")->required();
  bench_run->add_option("--sigmas", sigmas_text, "Comma-separated noise standard deviations");
  bench_run->add_option("--seeds", seeds, "Noise realisations per cell");
  bench_run->add_option("--base-seed", base_seed, "First noise seed");
  bench_run->add_option("--out", bench_out, "Output directory (default: $FEX_OUT_DIR)");
  bench_run->add_option("--jobs", jobs, "Worker threads");
  bench_run->add_option("--config", bench_config, "Pipeline config file for the proposed row");
  bench_run->add_option("--set", bench_sets, "Pipeline setting key=value (repeatable)");
  bench_run->add_option("--methods", bench_methods, "Comma-separated methods or 'all'");
  bench_run->add_flag("--no-proposed", no_proposed, "Skip the proposed pipeline row");

  // extract
  auto* extract = app.add_subcommand("extract", "Reconstruct an image with the fuzzy rule pipeline");
  std::string extract_image, extract_config, extract_out, extract_rules;
  std::vector<std::string> extract_sets;
  extract->add_option("--image", extract_image, "Noisy input image")->required();
  extract->add_option("--config", extract_config, "Pipeline config file");
  extract->add_option("--out", extract_out, "Output image (PGM/PPM)")->required();
  extract->add_option("--rules", extract_rules, "Also write the generated rule base here");
  extract->add_option("--set", extract_sets, "Pipeline setting key=value (repeatable)");

  // threshold
  auto* threshold = app.add_subcommand("threshold", "Print automatic thresholds");
  std::string threshold_image, threshold_method = "all";
  threshold->add_option("--image", threshold_image, "Input image (luma for color)")->required();
  threshold->add_option("--method", threshold_method, "Method name or 'all'");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Compare two images");
  std::string ref_path, test_path;
  metrics->add_option("--ref", ref_path, "Reference image")->required();
  metrics->add_option("--test", test_path, "Test image")->required();

  // noise
  auto* noise = app.add_subcommand("noise", "Add seeded Gaussian noise");
  std::string noise_image, noise_out;
  double noise_sigma = 15.0;
  std::uint64_t noise_seed = 1;
  noise->add_option("--image", noise_image, "Clean input image")->required();
  noise->add_option("--sigma", noise_sigma, "Standard deviation in intensity units");
  noise->add_option("--seed", noise_seed, "Generator seed");
  noise->add_option("--out", noise_out, "Output image")->required();

  // make-testimage
  auto* make = app.add_subcommand("make-testimage", "Write the procedural test image");
  std::string make_out, make_kind = "mandrill";
  int make_size = 256;
  make->add_option("--out", make_out, "Output image")->required();
  make->add_option("--kind", make_kind, "mandrill or two-tone")->check(CLI::IsMember({"mandrill", "two-tone"}));
  make->add_option("--size", make_size, "Width and height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (*bench_run) {
      fex::BenchPlan plan;
      for (const std::string& path : bench_images) {
        plan.images.push_back({fs::path(path).stem().string(), fex::read_image(path)});
      }
      plan.sigmas = parse_sigmas(sigmas_text);
      plan.seeds = seeds;
      plan.base_seed = base_seed;
      plan.jobs = jobs;
      plan.include_proposed = !no_proposed;
      plan.pipeline = load_config(bench_config, bench_sets);
      if (bench_methods != "all") {
        plan.methods.clear();
        std::stringstream ss(bench_methods);
        std::string name;
        while (std::getline(ss, name, ',')) plan.methods.push_back(method_or_throw(name));
      }
      if (bench_out.empty()) {
        const char* env = std::getenv("FEX_OUT_DIR");
        if (env == nullptr || *env == '\0') {
          throw fex::Error(fex::ErrorKind::InvalidArgument, "no --out given and FEX_OUT_DIR is unset");
        }
        bench_out = env;
      }
      const fex::BenchResult result = fex::run_bench(plan);
      fex::write_bench_outputs(plan, result, bench_out);
      std::cout << fex::emit_table(result);
    } else if (*extract) {
      const fex::PipelineConfig cfg = load_config(extract_config, extract_sets);
      const fex::Image input = fex::read_image(extract_image);
      const fex::ExtractionRun run = fex::run_extraction(input, cfg);
      fex::write_image(run.output, extract_out);
      if (!extract_rules.empty()) write_text(extract_rules, fex::serialize(*run.rules));
      std::cout << fex::summary_csv_header() << fex::summary_csv_row(run, fs::path(extract_image).stem().string());
    } else if (*threshold) {
      const fex::GrayImage gray = fex::gray_view(fex::read_image(threshold_image));
      const fex::Histogram hist = fex::histogram(gray);
      if (threshold_method == "all") {
        std::cout << fex::to_csv(fex::threshold_all(hist));
      } else {
        const fex::ThresholdResult r = fex::compute_threshold(hist, method_or_throw(threshold_method));
        std::cout << "method,t,converged\n"
                  << fex::to_string(r.method) << ',' << r.t << ',' << (r.converged ? "true" : "false") << '\n';
      }
    } else if (*metrics) {
      const fex::QualityReport q = fex::assess(fex::read_image(ref_path), fex::read_image(test_path));
      std::printf("mse,mae,snr_db,psnr_db\n%.6f,%.6f,%s,%s\n", q.mse, q.mae, fex::format_db(q.snr_db).c_str(),
                  fex::format_db(q.psnr_db).c_str());
    } else if (*noise) {
      fex::write_image(fex::add_gaussian_noise(fex::read_image(noise_image), fex::NoiseSpec{noise_sigma, noise_seed}),
                       noise_out);
    } else if (*make) {
      if (make_kind == "mandrill") {
        fex::write_image(fex::synthetic_mandrill(make_size, make_size), make_out);
      } else {
        fex::write_image(fex::two_tone(make_size, make_size), make_out);
      }
    }
  } catch (const fex::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(fex::to_string(e.kind())).c_str(), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return kExitFailure;
  }
  return 0;
}
