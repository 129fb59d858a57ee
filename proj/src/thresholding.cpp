#include "fex/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace fex {

namespace {

constexpr int kLast = kGrayLevels - 1;

constexpr std::array<std::string_view, kMethodCount> kNames = {
    "Default", "Huang",   "Intermodes", "IsoData",    "Li",           "MaxEntropy",
    "Mean",    "MinError", "Minimum",   "Moments",    "Otsu",         "Percentile",
    "RenyiEntropy", "Shanbhag", "Triangle", "Yen",
};

__extension__ typedef unsigned __int128 u128;  // exact n * sum(i^2)

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Prefix sums over the histogram. Index t covers bins [0, t].
struct Moments {
  explicit Moments(const Histogram& h) {
    std::uint64_t n = 0;
    std::uint64_t s = 0;
    u128 q = 0;
    for (int i = 0; i < kGrayLevels; ++i) {
      const std::uint64_t c = h[i];
      n += c;
      s += c * static_cast<std::uint64_t>(i);
      q += static_cast<u128>(c) * static_cast<unsigned>(i * i);
      count[i] = n;
      sum[i] = s;
      sumsq[i] = q;
    }
  }

  std::uint64_t n_below(int t) const { return count[t]; }
  std::uint64_t n_above(int t) const { return count[kLast] - count[t]; }
  std::uint64_t s_below(int t) const { return sum[t]; }
  std::uint64_t s_above(int t) const { return sum[kLast] - sum[t]; }
  u128 q_below(int t) const { return sumsq[t]; }
  u128 q_above(int t) const { return sumsq[kLast] - sumsq[t]; }

  double total() const { return static_cast<double>(count[kLast]); }

  std::array<std::uint64_t, kGrayLevels> count{};
  std::array<std::uint64_t, kGrayLevels> sum{};
  std::array<u128, kGrayLevels> sumsq{};
};

// Population variance n*q - s^2 over n^2, formed exactly in integers.
double class_variance(std::uint64_t n, std::uint64_t s, u128 q) {
  const u128 nq = static_cast<u128>(n) * q;
  const u128 s2 = static_cast<u128>(s) * s;
  if (nq <= s2) return 0.0;
  const double nd = static_cast<double>(n);
  return static_cast<double>(nq - s2) / (nd * nd);
}

enum class Goal { Maximize, Minimize };

// Scans every split with both classes non-empty, evaluates the criterion
// (nullopt = undefined at that t) and returns the lowest t whose value lies
// within the tie tolerance of the optimum.
std::optional<int> scan_extremum(const Histogram& hist, Goal goal,
                                 const std::function<std::optional<double>(int)>& criterion) {
  const int lo = hist.first_populated();
  const int hi = hist.last_populated();
  std::vector<std::pair<int, double>> values;
  values.reserve(static_cast<std::size_t>(hi - lo));
  for (int t = lo; t < hi; ++t) {
    if (auto v = criterion(t); v && std::isfinite(*v)) values.emplace_back(t, *v);
  }
  if (values.empty()) return std::nullopt;

  double best = values.front().second;
  for (const auto& [t, v] : values) {
    best = goal == Goal::Maximize ? std::max(best, v) : std::min(best, v);
  }
  const double slack = kCriterionTieTolerance * std::max(1.0, std::abs(best));
  for (const auto& [t, v] : values) {
    const bool tied = goal == Goal::Maximize ? v >= best - slack : v <= best + slack;
    if (tied) return t;
  }
  return values.front().first;
}

int clamp_to_split(const Histogram& hist, int t) {
  return std::clamp(t, hist.first_populated(), hist.last_populated() - 1);
}

int otsu(const Histogram& hist) {
  const Moments m(hist);
  const double n = m.total();
  auto t = scan_extremum(hist, Goal::Maximize, [&](int t) -> std::optional<double> {
    const double n0 = static_cast<double>(m.n_below(t));
    const double n1 = static_cast<double>(m.n_above(t));
    const double mu0 = static_cast<double>(m.s_below(t)) / n0;
    const double mu1 = static_cast<double>(m.s_above(t)) / n1;
    const double d = mu0 - mu1;
    return (n0 / n) * (n1 / n) * d * d;
  });
  return *t;
}

int mean(const Histogram& hist) {
  const Moments m(hist);
  return static_cast<int>(m.sum[kLast] / m.count[kLast]);
}

int percentile(const Histogram& hist) {
  // Doyle p-tile with p = 1/2: minimise |C(t)/N - 1/2| as |2 C(t) - N|.
  const Moments m(hist);
  const auto n = static_cast<std::int64_t>(m.count[kLast]);
  int best_t = 0;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int t = 0; t < kGrayLevels; ++t) {
    const std::int64_t d = std::abs(2 * static_cast<std::int64_t>(m.count[t]) - n);
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  return best_t;
}

ThresholdResult isodata(const Histogram& hist) {
  constexpr int kMaxIterations = 100;
  const Moments m(hist);
  auto step = [&](int t) {
    const double mu0 = static_cast<double>(m.s_below(t)) / static_cast<double>(m.n_below(t));
    const double mu1 = static_cast<double>(m.s_above(t)) / static_cast<double>(m.n_above(t));
    return clamp_to_split(hist, static_cast<int>(std::lround((mu0 + mu1) / 2.0)));
  };
  const double global_mean = static_cast<double>(m.sum[kLast]) / m.total();
  int t = clamp_to_split(hist, static_cast<int>(std::lround(global_mean)));
  for (int i = 0; i < kMaxIterations; ++i) {
    const int next = step(t);
    if (next == t) return {ThresholdMethod::IsoData, t, true};
    t = next;
  }
  return {ThresholdMethod::IsoData, t, false};
}

// Iterative intermeans with the extreme bins 0 and 255 ignored: the moving
// index advances from the lowest populated bin until it passes the average
// of the two class means. Falls back to the full histogram when trimming
// leaves fewer than two populated bins.
int default_intermeans(const Histogram& hist) {
  std::array<std::uint64_t, kGrayLevels> bins = hist.bins();
  bins[0] = 0;
  bins[kLast] = 0;
  Histogram trimmed(bins);
  const Histogram& h = trimmed.populated_count() >= 2 ? trimmed : hist;

  const int lo = h.first_populated();
  const int hi = h.last_populated();
  const Moments m(h);
  int moving = lo;
  double result = 0.0;
  do {
    const double mu0 = static_cast<double>(m.s_below(moving)) / static_cast<double>(m.n_below(moving));
    const double mu1 = static_cast<double>(m.s_above(moving)) / static_cast<double>(m.n_above(moving));
    result = (mu0 + mu1) / 2.0;
    ++moving;
  } while (moving + 1 <= result && moving < hi - 1);
  return clamp_to_split(hist, static_cast<int>(std::lround(result)));
}

int li(const Histogram& hist) {
  // Minimum cross entropy: minimise -S0 ln(mu0) - S1 ln(mu1).
  const Moments m(hist);
  auto t = scan_extremum(hist, Goal::Minimize, [&](int t) -> std::optional<double> {
    const double s0 = static_cast<double>(m.s_below(t));
    const double s1 = static_cast<double>(m.s_above(t));
    const double mu0 = s0 / static_cast<double>(m.n_below(t));
    const double mu1 = s1 / static_cast<double>(m.n_above(t));
    const double e0 = s0 > 0.0 ? s0 * std::log(mu0) : 0.0;
    const double e1 = s1 > 0.0 ? s1 * std::log(mu1) : 0.0;
    return -e0 - e1;
  });
  return *t;
}

// Prefix sums of h ln h and the class entropies built from them:
// H(class) = ln N_c - (sum h ln h) / N_c.
struct EntropyTables {
  explicit EntropyTables(const Histogram& hist) : m(hist) {
    double acc = 0.0;
    for (int i = 0; i < kGrayLevels; ++i) {
      acc += xlogx(static_cast<double>(hist[i]));
      hlogh[i] = acc;
    }
  }

  double below(int t) const {
    const double n0 = static_cast<double>(m.n_below(t));
    return std::log(n0) - hlogh[t] / n0;
  }
  double above(int t) const {
    const double n1 = static_cast<double>(m.n_above(t));
    return std::log(n1) - (hlogh[kLast] - hlogh[t]) / n1;
  }

  Moments m;
  std::array<double, kGrayLevels> hlogh{};
};

int max_entropy(const Histogram& hist) {
  const EntropyTables e(hist);
  return *scan_extremum(hist, Goal::Maximize,
                        [&](int t) -> std::optional<double> { return e.below(t) + e.above(t); });
}

// Renyi sum of class entropies for alpha != 1:
// 1/(1-alpha) * ln( sum_bg (p/P0)^alpha * sum_fg (p/P1)^alpha ).
int renyi_alpha(const Histogram& hist, double alpha) {
  const Moments m(hist);
  std::array<double, kGrayLevels> powsum{};
  double acc = 0.0;
  for (int i = 0; i < kGrayLevels; ++i) {
    acc += std::pow(static_cast<double>(hist[i]), alpha);
    powsum[i] = acc;
  }
  const double scale = 1.0 / (1.0 - alpha);
  return *scan_extremum(hist, Goal::Maximize, [&](int t) -> std::optional<double> {
    const double n0 = static_cast<double>(m.n_below(t));
    const double n1 = static_cast<double>(m.n_above(t));
    const double bg = powsum[t] / std::pow(n0, alpha);
    const double fg = (powsum[kLast] - powsum[t]) / std::pow(n1, alpha);
    return scale * std::log(bg * fg);
  });
}

int renyi_entropy(const Histogram& hist) {
  std::array<int, 3> ts = detail::renyi_component_thresholds(hist);
  std::sort(ts.begin(), ts.end());
  const auto [t1, t2, t3] = ts;

  // Sahoo-Wilkins-Yeager weighting of the three candidate thresholds.
  int b1 = 1, b2 = 2, b3 = 1;
  const bool close12 = std::abs(t1 - t2) <= 5;
  const bool close23 = std::abs(t2 - t3) <= 5;
  if (close12 && !close23) {
    b1 = 0; b2 = 1; b3 = 3;
  } else if (!close12 && close23) {
    b1 = 3; b2 = 1; b3 = 0;
  }

  const Moments m(hist);
  const double p1 = static_cast<double>(m.n_below(t1)) / m.total();
  const double p3 = static_cast<double>(m.n_below(t3)) / m.total();
  const double omega = p3 - p1;
  const double opt = t1 * (p1 + 0.25 * omega * b1) + 0.25 * t2 * omega * b2 +
                     t3 * ((1.0 - p3) + 0.25 * omega * b3);
  return clamp_to_split(hist, static_cast<int>(std::floor(opt + 1e-9)));
}

int yen(const Histogram& hist) {
  const Moments m(hist);
  std::array<double, kGrayLevels> sq{};
  double acc = 0.0;
  for (int i = 0; i < kGrayLevels; ++i) {
    const double c = static_cast<double>(hist[i]);
    acc += c * c;
    sq[i] = acc;
  }
  const double n = m.total();
  const double n2 = n * n;
  return *scan_extremum(hist, Goal::Maximize, [&](int t) -> std::optional<double> {
    const double p0 = static_cast<double>(m.n_below(t)) / n;
    const double p1 = static_cast<double>(m.n_above(t)) / n;
    const double sq0 = sq[t] / n2;
    const double sq1 = (sq[kLast] - sq[t]) / n2;
    return -std::log(sq0 * sq1) + 2.0 * std::log(p0 * p1);
  });
}

int min_error(const Histogram& hist) {
  // Kittler-Illingworth: J = 1 + 2 (P0 ln s0 + P1 ln s1) - 2 (P0 ln P0 + P1 ln P1).
  const Moments m(hist);
  const double n = m.total();
  auto t = scan_extremum(hist, Goal::Minimize, [&](int t) -> std::optional<double> {
    const double var0 = class_variance(m.n_below(t), m.s_below(t), m.q_below(t));
    const double var1 = class_variance(m.n_above(t), m.s_above(t), m.q_above(t));
    if (var0 <= 0.0 || var1 <= 0.0) return std::nullopt;
    const double p0 = static_cast<double>(m.n_below(t)) / n;
    const double p1 = static_cast<double>(m.n_above(t)) / n;
    return 1.0 + (p0 * std::log(var0) + p1 * std::log(var1)) - 2.0 * (p0 * std::log(p0) + p1 * std::log(p1));
  });
  if (!t) throw Error(ErrorKind::Degenerate, "MinError: no split with two non-constant classes");
  return *t;
}

double shannon_fuzziness(double mu) { return -xlogx(mu) - xlogx(1.0 - mu); }

int huang(const Histogram& hist) {
  const Moments m(hist);
  const int lo = hist.first_populated();
  const int hi = hist.last_populated();
  const double c = static_cast<double>(hi - lo);
  return *scan_extremum(hist, Goal::Minimize, [&](int t) -> std::optional<double> {
    const double mu0 = static_cast<double>(m.s_below(t)) / static_cast<double>(m.n_below(t));
    const double mu1 = static_cast<double>(m.s_above(t)) / static_cast<double>(m.n_above(t));
    double e = 0.0;
    for (int i = lo; i <= hi; ++i) {
      if (hist[i] == 0) continue;
      const double centre = i <= t ? mu0 : mu1;
      const double membership = 1.0 / (1.0 + std::abs(i - centre) / c);
      e += static_cast<double>(hist[i]) * shannon_fuzziness(membership);
    }
    return e;
  });
}

int shanbhag(const Histogram& hist) {
  const Moments m(hist);
  const double n = m.total();
  return *scan_extremum(hist, Goal::Minimize, [&](int t) -> std::optional<double> {
    const double c0 = static_cast<double>(m.n_below(t));
    const double c1 = static_cast<double>(m.n_above(t));
    double bg = 0.0;
    for (int i = 1; i <= t; ++i) {
      if (hist[i] == 0) continue;
      const double ratio = static_cast<double>(m.count[i - 1]) / c0;
      bg -= (static_cast<double>(hist[i]) / n) * std::log(1.0 - 0.5 * ratio);
    }
    bg *= 0.5 * n / c0;
    double fg = 0.0;
    for (int i = t + 1; i < kGrayLevels; ++i) {
      if (hist[i] == 0) continue;
      const double ratio = static_cast<double>(m.n_above(i)) / c1;
      fg -= (static_cast<double>(hist[i]) / n) * std::log(1.0 - 0.5 * ratio);
    }
    fg *= 0.5 * n / c1;
    return std::abs(bg - fg);
  });
}

int moments_threshold(const Histogram& hist) {
  // Tsai: match the first three moments with a two-level image, then cut
  // at the p0-tile of the histogram.
  const Moments mm(hist);
  const double n = mm.total();
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  for (int i = 0; i < kGrayLevels; ++i) {
    const double p = static_cast<double>(hist[i]) / n;
    const double x = i;
    m1 += x * p;
    m2 += x * x * p;
    m3 += x * x * x * p;
  }
  const double cd = m2 - m1 * m1;
  const double c0 = (-m2 * m2 + m1 * m3) / cd;
  const double c1 = (-m3 + m2 * m1) / cd;
  const double disc = c1 * c1 - 4.0 * c0;
  if (!(cd > 0.0) || !(disc >= 0.0)) throw Error(ErrorKind::Degenerate, "Moments: no two-level fit");
  const double z0 = 0.5 * (-c1 - std::sqrt(disc));
  const double z1 = 0.5 * (-c1 + std::sqrt(disc));
  const double p0 = (z1 - m1) / (z1 - z0);
  if (!std::isfinite(p0)) throw Error(ErrorKind::Degenerate, "Moments: no two-level fit");

  int t = kLast;
  for (int i = 0; i < kGrayLevels; ++i) {
    if (static_cast<double>(mm.count[i]) / n > p0) {
      t = i;
      break;
    }
  }
  return clamp_to_split(hist, t);
}

bool is_bimodal(const std::vector<double>& y) {
  int modes = 0;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (y[k - 1] < y[k] && y[k + 1] < y[k]) {
      if (++modes > 2) return false;
    }
  }
  return modes == 2;
}

// Histogram restricted to [first, last] and smoothed with a 3-point running
// mean (zero outside) until exactly two strict local maxima remain.
std::vector<double> smooth_until_bimodal(const Histogram& hist, std::string_view who) {
  constexpr int kMaxIterations = 10000;
  const int lo = hist.first_populated();
  const int hi = hist.last_populated();
  std::vector<double> y(static_cast<std::size_t>(hi - lo + 1));
  for (int i = lo; i <= hi; ++i) y[static_cast<std::size_t>(i - lo)] = static_cast<double>(hist[i]);

  std::vector<double> next(y.size());
  int iter = 0;
  while (!is_bimodal(y)) {
    if (++iter > kMaxIterations) {
      throw Error(ErrorKind::NonConvergent,
                  std::string(who) + ": histogram not bimodal after 10000 smoothing passes");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double left = i > 0 ? y[i - 1] : 0.0;
      const double right = i + 1 < y.size() ? y[i + 1] : 0.0;
      next[i] = (left + y[i] + right) / 3.0;
    }
    y.swap(next);
  }
  return y;
}

int intermodes(const Histogram& hist) {
  const std::vector<double> y = smooth_until_bimodal(hist, "Intermodes");
  int sum = 0;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (y[k - 1] < y[k] && y[k + 1] < y[k]) sum += static_cast<int>(k);
  }
  return clamp_to_split(hist, hist.first_populated() + sum / 2);
}

int minimum(const Histogram& hist) {
  const std::vector<double> y = smooth_until_bimodal(hist, "Minimum");
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (y[k - 1] > y[k] && y[k + 1] >= y[k]) {
      return clamp_to_split(hist, hist.first_populated() + static_cast<int>(k));
    }
  }
  throw Error(ErrorKind::NonConvergent, "Minimum: no valley between the two modes");
}

// Zack's triangle. The long tail is taken on the side of the peak holding
// more pixels; the histogram is mirrored so the tail is always on the left.
int triangle(const Histogram& hist) {
  int peak = 0;
  for (int i = 1; i < kGrayLevels; ++i) {
    if (hist[i] > hist[peak]) peak = i;
  }
  std::uint64_t left_mass = 0;
  std::uint64_t right_mass = 0;
  for (int i = 0; i < kGrayLevels; ++i) {
    if (i < peak) left_mass += hist[i];
    if (i > peak) right_mass += hist[i];
  }
  const bool mirrored = right_mass > left_mass;

  std::array<double, kGrayLevels> d{};
  for (int i = 0; i < kGrayLevels; ++i) {
    d[static_cast<std::size_t>(i)] = static_cast<double>(hist[mirrored ? kLast - i : i]);
  }
  const int top = mirrored ? kLast - peak : peak;
  int lo = 0;
  while (lo < kLast && d[static_cast<std::size_t>(lo)] == 0.0) ++lo;
  if (lo > 0) --lo;  // anchor the line on the empty bin next to the tail

  int split = lo;
  if (lo < top) {
    double nx = d[static_cast<std::size_t>(top)];
    double ny = static_cast<double>(lo - top);
    const double len = std::hypot(nx, ny);
    nx /= len;
    ny /= len;
    const double offset = nx * lo + ny * d[static_cast<std::size_t>(lo)];
    double best = 0.0;
    for (int i = lo + 1; i <= top; ++i) {
      const double dist = nx * i + ny * d[static_cast<std::size_t>(i)] - offset;
      if (dist > best) {
        best = dist;
        split = i;
      }
    }
    --split;
  }
  return clamp_to_split(hist, mirrored ? kLast - split : split);
}

}  // namespace

std::string_view to_string(ThresholdMethod m) { return kNames[method_index(m)]; }

std::optional<ThresholdMethod> parse_method(std::string_view name) {
  for (std::size_t i = 0; i < kMethodCount; ++i) {
    if (kNames[i] == name) return kAllMethods[i];
  }
  return std::nullopt;
}

Histogram::Histogram(const std::array<std::uint64_t, kGrayLevels>& bins) : bins_(bins) {
  for (auto b : bins_) total_ += b;
}

int Histogram::first_populated() const noexcept {
  for (int i = 0; i < kGrayLevels; ++i) {
    if (bins_[static_cast<std::size_t>(i)] > 0) return i;
  }
  return -1;
}

int Histogram::last_populated() const noexcept {
  for (int i = kLast; i >= 0; --i) {
    if (bins_[static_cast<std::size_t>(i)] > 0) return i;
  }
  return -1;
}

int Histogram::populated_count() const noexcept {
  return static_cast<int>(std::count_if(bins_.begin(), bins_.end(), [](auto b) { return b > 0; }));
}

Histogram histogram(const GrayImage& img) {
  if (img.empty()) throw Error(ErrorKind::InvalidArgument, "histogram of an empty image");
  std::array<std::uint64_t, kGrayLevels> bins{};
  for (std::uint8_t v : img.pixels()) ++bins[v];
  return Histogram(bins);
}

ThresholdResult compute_threshold(const Histogram& hist, ThresholdMethod method) {
  if (hist.total() == 0) throw Error(ErrorKind::InvalidArgument, "empty histogram");
  if (hist.populated_count() < 2) {
    throw Error(ErrorKind::Degenerate,
                std::string(to_string(method)) + ": histogram has a single populated bin");
  }
  auto done = [method](int t) { return ThresholdResult{method, t, true}; };
  switch (method) {
    case ThresholdMethod::Default: return done(default_intermeans(hist));
    case ThresholdMethod::Huang: return done(huang(hist));
    case ThresholdMethod::Intermodes: return done(intermodes(hist));
    case ThresholdMethod::IsoData: return isodata(hist);
    case ThresholdMethod::Li: return done(li(hist));
    case ThresholdMethod::MaxEntropy: return done(max_entropy(hist));
    case ThresholdMethod::Mean: return done(mean(hist));
    case ThresholdMethod::MinError: return done(min_error(hist));
    case ThresholdMethod::Minimum: return done(minimum(hist));
    case ThresholdMethod::Moments: return done(moments_threshold(hist));
    case ThresholdMethod::Otsu: return done(otsu(hist));
    case ThresholdMethod::Percentile: return done(percentile(hist));
    case ThresholdMethod::RenyiEntropy: return done(renyi_entropy(hist));
    case ThresholdMethod::Shanbhag: return done(shanbhag(hist));
    case ThresholdMethod::Triangle: return done(triangle(hist));
    case ThresholdMethod::Yen: return done(yen(hist));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown threshold method");
}

ThresholdMap threshold_all(const Histogram& hist) {
  ThresholdMap out;
  for (ThresholdMethod m : kAllMethods) {
    ThresholdEntry entry;
    try {
      entry.result = compute_threshold(hist, m);
    } catch (const Error& e) {
      entry.error = e.kind();
      entry.message = e.what();
    }
    out.emplace(m, std::move(entry));
  }
  return out;
}

ThresholdMap threshold_all(const GrayImage& img) { return threshold_all(histogram(img)); }

GrayImage apply_threshold(const GrayImage& img, int t) {
  if (t < 0 || t > kLast) throw Error(ErrorKind::InvalidArgument, "threshold outside [0, 255]");
  GrayImage out(img.width(), img.height());
  const auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > t ? 255 : 0;
  return out;
}

std::string to_csv(const ThresholdMap& map) {
  std::ostringstream os;
  os << "method,t,converged\n";
  for (const auto& [method, entry] : map) {
    os << to_string(method) << ',';
    if (entry.ok()) {
      os << entry.result->t << ',' << (entry.result->converged ? "true" : "false") << '\n';
    } else {
      os << "nan,false\n";
    }
  }
  return os.str();
}

namespace detail {

std::array<int, 3> renyi_component_thresholds(const Histogram& hist) {
  if (hist.populated_count() < 2) {
    throw Error(ErrorKind::Degenerate, "RenyiEntropy: histogram has a single populated bin");
  }
  return {renyi_alpha(hist, 0.5), max_entropy(hist), renyi_alpha(hist, 2.0)};
}

}  // namespace detail

}  // namespace fex
