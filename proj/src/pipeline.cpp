#include "fex/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fex/error.hpp"

namespace fex {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Universe {
  double lo;
  double hi;
};

Universe universe_of(Feature f) {
  switch (f) {
    case Feature::Intensity:
    case Feature::LocalMean:
      return {0.0, 255.0};
    case Feature::LocalStd:
      return {0.0, 127.5};  // largest population std-dev of 8-bit data
    case Feature::Membership:
      return {0.0, 1.0};
  }
  return {0.0, 255.0};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(trim(s.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

[[noreturn]] void bad_setting(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::InvalidArgument,
              "invalid value '" + std::string(value) + "' for setting '" + std::string(key) + "'");
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T v{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) bad_setting(key, value);
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  bad_setting(key, value);
}

// Gray-plane inputs for every configured feature.
struct FeaturePlanes {
  std::vector<std::vector<double>> planes;  // one per configured variable
};

FeaturePlanes feature_planes(const GrayImage& img, const LocalStats& stats, const PipelineConfig& cfg,
                             double fuzzifier) {
  FeaturePlanes out;
  std::optional<FuzzyImage> membership;
  for (Feature f : cfg.variables) {
    switch (f) {
      case Feature::Intensity: {
        const auto px = img.pixels();
        out.planes.emplace_back(px.begin(), px.end());
        break;
      }
      case Feature::LocalMean:
        out.planes.push_back(stats.mean);
        break;
      case Feature::LocalStd:
        out.planes.push_back(stats.stddev);
        break;
      case Feature::Membership:
        if (!membership) membership = fuzzify_gaussian(img, fuzzifier);
        out.planes.push_back(membership->grades);
        break;
    }
  }
  return out;
}

std::uint8_t to_intensity(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Runs the rule base over one plane. `fallback` supplies the value for
// pixels no rule reaches.
GrayImage reconstruct(const GrayImage& plane, const RuleBase& rb, const FeaturePlanes& inputs,
                      const std::vector<double>& fallback, std::size_t& fallback_pixels) {
  GrayImage out(plane.width(), plane.height());
  auto dst = out.pixels();
  std::vector<double> x(inputs.planes.size());
  for (std::size_t i = 0; i < dst.size(); ++i) {
    for (std::size_t v = 0; v < x.size(); ++v) x[v] = inputs.planes[v][i];
    if (auto value = evaluate(rb, x)) {
      dst[i] = to_intensity(*value);
    } else {
      dst[i] = to_intensity(fallback[i]);
      ++fallback_pixels;
    }
  }
  return out;
}

std::vector<double> fallback_values(const GrayImage& plane, const LocalStats& stats, const RoiMask& fused,
                                    const PipelineConfig& cfg) {
  if (cfg.fallback == FallbackPolicy::ClassMean) return class_local_mean(plane, fused, cfg.window);
  std::vector<double> out(plane.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fused.foreground[i] ? stats.mean[i] : 0.0;
  return out;
}

}  // namespace

std::string_view to_string(Feature f) {
  switch (f) {
    case Feature::Intensity: return "intensity";
    case Feature::LocalMean: return "local_mean";
    case Feature::LocalStd: return "local_std";
    case Feature::Membership: return "membership";
  }
  return "unknown";
}

std::optional<Feature> parse_feature(std::string_view name) {
  for (Feature f : {Feature::Intensity, Feature::LocalMean, Feature::LocalStd, Feature::Membership}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (window < 1 || window % 2 == 0) fail("window must be a positive odd integer");
  if (fuzzifier && !(*fuzzifier > 0.0)) fail("fuzzifier must be > 0");
  if (variables.empty()) fail("at least one rule-base variable is required");
  if (region_counts.size() != variables.size()) fail("regions needs one count per variable");
  for (int k : region_counts) {
    if (k < 2) fail("region counts must be >= 2");
  }
  if (output_regions < 2) fail("output_regions must be >= 2");
  if (sample_stride < 1) fail("sample_stride must be >= 1");
  for (std::size_t i = 0; i < variables.size(); ++i) {
    for (std::size_t j = i + 1; j < variables.size(); ++j) {
      if (variables[i] == variables[j]) fail("duplicate rule-base variable");
    }
  }
}

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "window") {
    cfg.window = parse_number<int>(key, value);
  } else if (key == "fuzzifier" || key == "fh") {
    if (value == "auto" || value.empty()) {
      cfg.fuzzifier.reset();
    } else {
      cfg.fuzzifier = parse_number<double>(key, value);
    }
  } else if (key == "variables") {
    cfg.variables.clear();
    for (auto name : split_list(value)) {
      auto f = parse_feature(name);
      if (!f) bad_setting(key, value);
      cfg.variables.push_back(*f);
    }
  } else if (key == "regions") {
    cfg.region_counts.clear();
    for (auto n : split_list(value)) cfg.region_counts.push_back(parse_number<int>(key, n));
  } else if (key == "output_regions") {
    cfg.output_regions = parse_number<int>(key, value);
  } else if (key == "anchors") {
    cfg.anchors = parse_bool(key, value);
  } else if (key == "fallback") {
    if (value == "class_mean") {
      cfg.fallback = FallbackPolicy::ClassMean;
    } else if (value == "fused") {
      cfg.fallback = FallbackPolicy::Fused;
    } else {
      bad_setting(key, value);
    }
  } else if (key == "sample_stride") {
    cfg.sample_stride = parse_number<int>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown setting '" + std::string(key) + "'");
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::InvalidArgument, "config line without '=': " + std::string(line));
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::string to_text(const PipelineConfig& cfg) {
  std::ostringstream os;
  os << "window=" << cfg.window << '\n';
  os << "fuzzifier=";
  if (cfg.fuzzifier) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, *cfg.fuzzifier);
    os << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  } else {
    os << "auto";
  }
  os << '\n' << "variables=";
  for (std::size_t i = 0; i < cfg.variables.size(); ++i) os << (i ? "," : "") << to_string(cfg.variables[i]);
  os << '\n' << "regions=";
  for (std::size_t i = 0; i < cfg.region_counts.size(); ++i) os << (i ? "," : "") << cfg.region_counts[i];
  os << '\n';
  os << "output_regions=" << cfg.output_regions << '\n';
  os << "anchors=" << (cfg.anchors ? "on" : "off") << '\n';
  os << "fallback=" << (cfg.fallback == FallbackPolicy::ClassMean ? "class_mean" : "fused") << '\n';
  os << "sample_stride=" << cfg.sample_stride << '\n';
  os << "seed=" << cfg.seed << '\n';
  return os.str();
}

std::vector<double> class_local_mean(const GrayImage& img, const RoiMask& fused, int window) {
  if (fused.width != img.width() || fused.height != img.height()) {
    throw Error(ErrorKind::DimensionMismatch, "mask and image differ in size");
  }
  const int w = img.width();
  const int h = img.height();
  const int r = window / 2;
  std::vector<double> out(img.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool cls = fused.at(x, y);
      int sum = 0;
      int n = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = std::clamp(x + dx, 0, w - 1);
          if (fused.at(xx, yy) == cls) {
            sum += img.at(xx, yy);
            ++n;
          }
        }
      }
      // n >= 1: the centre pixel always matches its own class.
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
          static_cast<double>(sum) / n;
    }
  }
  return out;
}

ExtractionRun run_extraction(const Image& noisy, const PipelineConfig& cfg) {
  cfg.validate();
  ExtractionRun run;
  run.config = cfg;
  const GrayImage gray = gray_view(noisy);

  auto t0 = Clock::now();
  run.thresholds = threshold_all(gray);
  std::vector<RoiMask> masks = roi_masks(gray, run.thresholds);
  if (masks.empty()) throw Error(ErrorKind::Degenerate, "degenerate image: no threshold method separates it");
  run.fused = fuse_decisions(masks);
  run.timings.thresholds_ms = ms_since(t0);

  t0 = Clock::now();
  run.fuzzifier = cfg.fuzzifier.value_or(default_fuzzifier(gray));
  run.membership = fuzzify_gaussian(gray, run.fuzzifier);
  const LocalStats gray_stats = local_stats(gray, cfg.window);
  const FeaturePlanes gray_inputs = feature_planes(gray, gray_stats, cfg, run.fuzzifier);
  const std::vector<double> targets = class_local_mean(gray, run.fused, cfg.window);
  run.timings.features_ms = ms_since(t0);

  t0 = Clock::now();
  std::vector<double> anchors;
  for (const auto& [method, entry] : run.thresholds) {
    if (entry.ok()) anchors.push_back(entry.result->t);
  }
  std::vector<FuzzyVariable> inputs;
  for (std::size_t v = 0; v < cfg.variables.size(); ++v) {
    const Feature f = cfg.variables[v];
    const Universe u = universe_of(f);
    const bool anchored = cfg.anchors && f == Feature::Intensity;
    inputs.push_back(make_variable(std::string(to_string(f)), u.lo, u.hi,
                                   partition_universe(u.lo, u.hi, cfg.region_counts[v],
                                                      anchored ? std::optional(anchors) : std::nullopt)));
  }
  FuzzyVariable output = make_variable("out", 0.0, 255.0, partition_universe(0.0, 255.0, cfg.output_regions));

  const int w = gray.width();
  const int h = gray.height();
  const auto stride = static_cast<std::uint64_t>(cfg.sample_stride);
  const int ox = static_cast<int>(cfg.seed % stride) % w;
  const int oy = static_cast<int>((cfg.seed / stride) % stride) % h;
  std::vector<TrainingDatum> data;
  for (int y = oy; y < h; y += cfg.sample_stride) {
    for (int x = ox; x < w; x += cfg.sample_stride) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      TrainingDatum d;
      d.inputs.reserve(gray_inputs.planes.size());
      for (const auto& plane : gray_inputs.planes) d.inputs.push_back(plane[i]);
      d.output = targets[i];
      data.push_back(std::move(d));
    }
  }
  if (data.empty()) throw Error(ErrorKind::EmptyRuleBase, "no training samples");
  run.training_pairs = data.size();
  run.rules = std::make_shared<const RuleBase>(generate_rules(data, std::move(inputs), std::move(output)));
  if (run.rules->size() == 0) throw Error(ErrorKind::EmptyRuleBase, "rule generation produced no rules");
  run.timings.rules_ms = ms_since(t0);

  t0 = Clock::now();
  if (const auto* color = std::get_if<ColorImage>(&noisy)) {
    ColorImage out(color->width(), color->height());
    for (int c = 0; c < 3; ++c) {
      const GrayImage& plane = color->plane(c);
      const LocalStats stats = local_stats(plane, cfg.window);
      const FeaturePlanes in = feature_planes(plane, stats, cfg, run.fuzzifier);
      out.plane(c) = reconstruct(plane, *run.rules, in, fallback_values(plane, stats, run.fused, cfg),
                                 run.fallback_pixels);
    }
    run.output = std::move(out);
  } else {
    run.output = reconstruct(gray, *run.rules, gray_inputs, fallback_values(gray, gray_stats, run.fused, cfg),
                             run.fallback_pixels);
  }
  run.timings.inference_ms = ms_since(t0);
  return run;
}

GrayImage run_baseline(const Image& noisy, ThresholdMethod method) {
  const GrayImage gray = gray_view(noisy);
  return apply_threshold(gray, compute_threshold(histogram(gray), method).t);
}

std::string summary_csv_header() {
  return "image,width,height,channels,rules,training_pairs,fallback_pixels,fuzzifier,"
         "thresholds_ms,features_ms,rules_ms,inference_ms\n";
}

std::string summary_csv_row(const ExtractionRun& run, std::string_view image_name) {
  const int channels = std::holds_alternative<ColorImage>(run.output) ? 3 : 1;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*s,%d,%d,%d,%zu,%zu,%zu,%.6f,%.3f,%.3f,%.3f,%.3f\n",
                static_cast<int>(image_name.size()), image_name.data(), width_of(run.output),
                height_of(run.output), channels, run.rules ? run.rules->size() : std::size_t{0},
                run.training_pairs, run.fallback_pixels, run.fuzzifier, run.timings.thresholds_ms,
                run.timings.features_ms, run.timings.rules_ms, run.timings.inference_ms);
  return buf;
}

}  // namespace fex
