#include "fex/fuzzy_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fex/error.hpp"

namespace fex {

namespace {

constexpr std::size_t kDenseLimit = std::size_t{1} << 22;

struct Evaluator {
  double x;
  double operator()(const GaussianShape& g) const {
    const double d = g.peak - x;
    return std::exp(-(d * d) / (2.0 * g.fuzzifier * g.fuzzifier));
  }
  double operator()(const TriangularShape& t) const {
    if (x < t.a || x > t.c) return 0.0;
    if (x == t.b) return 1.0;
    if (x < t.b) return (x - t.a) / (t.b - t.a);
    return (t.c - x) / (t.c - t.b);
  }
  double operator()(const TrapezoidalShape& t) const {
    if (x < t.a || x > t.d) return 0.0;
    if (x >= t.b && x <= t.c) return 1.0;
    if (x < t.b) return (x - t.a) / (t.b - t.a);
    return (t.d - x) / (t.d - t.c);
  }
};

void check_universe(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::InvalidArgument, "universe must be a finite interval with lo < hi");
  }
}

std::vector<FuzzyRegion> triangles_on(const std::vector<double>& peaks, double lo, double hi) {
  std::vector<FuzzyRegion> regions;
  regions.reserve(peaks.size());
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const double a = i == 0 ? peaks[i] : peaks[i - 1];
    const double c = i + 1 == peaks.size() ? peaks[i] : peaks[i + 1];
    regions.push_back({"R" + std::to_string(i), MembershipFunction::triangular(a, peaks[i], c), lo, hi});
  }
  return regions;
}

// Sample index range [first, last] of the output grid covered by [a, b].
std::pair<int, int> sample_range(const FuzzySet& set, double a, double b) {
  const double scale = (kOutputSamples - 1) / (set.hi - set.lo);
  const double fa = std::ceil((a - set.lo) * scale - 1e-9);
  const double fb = std::floor((b - set.lo) * scale + 1e-9);
  const int first = static_cast<int>(std::clamp(fa, 0.0, double{kOutputSamples - 1}));
  const int last = static_cast<int>(std::clamp(fb, 0.0, double{kOutputSamples - 1}));
  return {first, last};
}

struct Scratch {
  std::vector<std::vector<std::pair<int, double>>> active;
  std::vector<double> strength;  // per output region
  std::vector<int> index;
  std::vector<int> antecedent;
};

// Fires every rule reachable from the active input regions and writes the
// aggregated clipped consequents into `set`. Returns the touched sample
// range, or nullopt when nothing fired.
std::optional<std::pair<int, int>> aggregate(const RuleBase& rb, std::span<const double> inputs, FuzzySet& set,
                                             Scratch& s) {
  const auto& vars = rb.inputs();
  if (inputs.size() != vars.size()) {
    throw Error(ErrorKind::InvalidArgument, "input count does not match the rule base");
  }
  const FuzzyVariable& out = rb.output();
  set.lo = out.lo;
  set.hi = out.hi;
  set.mu.fill(0.0);

  s.active.resize(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const double x = std::clamp(inputs[v], vars[v].lo, vars[v].hi);
    auto& act = s.active[v];
    act.clear();
    for (std::size_t r = 0; r < vars[v].regions.size(); ++r) {
      const double m = vars[v].regions[r].mf(x);
      if (m > 0.0) act.emplace_back(static_cast<int>(r), m);
    }
    if (act.empty()) return std::nullopt;
  }

  s.strength.assign(out.regions.size(), 0.0);
  s.index.assign(vars.size(), 0);
  s.antecedent.resize(vars.size());
  bool fired = false;
  while (true) {
    double w = 1.0;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const auto& [region, m] = s.active[v][static_cast<std::size_t>(s.index[v])];
      s.antecedent[v] = region;
      w = std::min(w, m);
    }
    if (const FuzzyRule* rule = rb.find(s.antecedent)) {
      double& slot = s.strength[static_cast<std::size_t>(rule->consequent)];
      slot = std::max(slot, w);
      fired = true;
    }
    std::size_t v = 0;
    for (; v < vars.size(); ++v) {
      if (++s.index[v] < static_cast<int>(s.active[v].size())) break;
      s.index[v] = 0;
    }
    if (v == vars.size()) break;
  }
  if (!fired) return std::nullopt;

  int touched_lo = kOutputSamples;
  int touched_hi = -1;
  for (std::size_t j = 0; j < out.regions.size(); ++j) {
    const double w = s.strength[j];
    if (w <= 0.0) continue;
    const MembershipFunction& mf = out.regions[j].mf;
    const auto [a, b] = mf.support();
    const auto [first, last] = sample_range(set, a, b);
    for (int i = first; i <= last; ++i) {
      const double clipped = std::min(w, mf(set.x(i)));
      double& cell = set.mu[static_cast<std::size_t>(i)];
      cell = std::max(cell, clipped);
    }
    touched_lo = std::min(touched_lo, first);
    touched_hi = std::max(touched_hi, last);
  }
  if (touched_hi < touched_lo) return std::nullopt;
  return std::pair{touched_lo, touched_hi};
}

std::optional<double> centroid(const FuzzySet& set, int first, int last) {
  double num = 0.0;
  double den = 0.0;
  for (int i = first; i <= last; ++i) {
    const double m = set.mu[static_cast<std::size_t>(i)];
    num += set.x(i) * m;
    den += m;
  }
  if (den <= 0.0) return std::nullopt;
  return std::clamp(num / den, set.lo, set.hi);
}

}  // namespace

MembershipFunction::MembershipFunction(Shape shape) : shape_(shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianShape>) {
          if (!(s.fuzzifier > 0.0)) throw Error(ErrorKind::InvalidArgument, "fuzzifier must be > 0");
        } else if constexpr (std::is_same_v<T, TriangularShape>) {
          if (!(s.a <= s.b && s.b <= s.c) || s.a == s.c) {
            throw Error(ErrorKind::InvalidArgument, "triangle needs a <= b <= c with a < c");
          }
        } else {
          if (!(s.a <= s.b && s.b <= s.c && s.c <= s.d) || s.a == s.d) {
            throw Error(ErrorKind::InvalidArgument, "trapezoid needs a <= b <= c <= d with a < d");
          }
        }
      },
      shape_);
}

MembershipFunction MembershipFunction::gaussian(double peak, double fuzzifier) {
  return MembershipFunction(GaussianShape{peak, fuzzifier});
}

MembershipFunction MembershipFunction::triangular(double a, double b, double c) {
  return MembershipFunction(TriangularShape{a, b, c});
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c, double d) {
  return MembershipFunction(TrapezoidalShape{a, b, c, d});
}

double MembershipFunction::operator()(double x) const { return std::visit(Evaluator{x}, shape_); }

std::pair<double, double> MembershipFunction::support() const {
  static constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [](const auto& s) -> std::pair<double, double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianShape>) {
          return {-inf, inf};
        } else if constexpr (std::is_same_v<T, TriangularShape>) {
          return {s.a, s.c};
        } else {
          return {s.a, s.d};
        }
      },
      shape_);
}

double MembershipFunction::peak() const {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianShape>) {
          return s.peak;
        } else if constexpr (std::is_same_v<T, TriangularShape>) {
          return s.b;
        } else {
          return 0.5 * (s.b + s.c);
        }
      },
      shape_);
}

std::pair<int, double> FuzzyVariable::best_region(double x) const {
  int best = -1;
  double best_mu = -1.0;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const double m = regions[r].mf(x);
    if (m > best_mu) {
      best_mu = m;
      best = static_cast<int>(r);
    }
  }
  return {best, best_mu};
}

FuzzyImage fuzzify_gaussian(const GrayImage& img, double fuzzifier) {
  if (!(fuzzifier > 0.0)) throw Error(ErrorKind::InvalidArgument, "fuzzifier must be > 0");
  if (img.empty()) throw Error(ErrorKind::InvalidArgument, "cannot fuzzify an empty image");
  const auto px = img.pixels();
  const double xmax = *std::max_element(px.begin(), px.end());
  const double denom = 2.0 * fuzzifier * fuzzifier;
  FuzzyImage out{img.width(), img.height(), std::vector<double>(px.size())};
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double d = xmax - px[i];
    out.grades[i] = std::exp(-(d * d) / denom);
  }
  return out;
}

double default_fuzzifier(const GrayImage& img) {
  if (img.empty()) throw Error(ErrorKind::InvalidArgument, "empty image");
  const auto px = img.pixels();
  double s = 0.0, q = 0.0;
  for (std::uint8_t v : px) {
    s += v;
    q += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(px.size());
  const double var = std::max(0.0, q / n - (s / n) * (s / n));
  const double sd = std::sqrt(var);
  return sd > 0.0 ? 0.5 * sd : 1.0;
}

std::vector<FuzzyRegion> partition_universe(double lo, double hi, int k, std::optional<std::vector<double>> anchors) {
  check_universe(lo, hi);
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "a partition needs at least two regions");

  std::vector<double> peaks;
  if (!anchors) {
    peaks.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) peaks.push_back(i + 1 == k ? hi : lo + (hi - lo) * i / (k - 1));
    return triangles_on(peaks, lo, hi);
  }

  std::vector<double> sorted = *anchors;
  for (double a : sorted) {
    if (!(a >= lo && a <= hi)) throw Error(ErrorKind::InvalidArgument, "anchor outside the universe");
  }
  std::sort(sorted.begin(), sorted.end());
  peaks.push_back(lo);
  for (double a : sorted) {
    if (a - peaks.back() > 1.0) peaks.push_back(a);
  }
  if (hi - peaks.back() > 1.0) {
    peaks.push_back(hi);
  } else if (peaks.size() > 1) {
    peaks.back() = hi;
  } else {
    peaks.push_back(hi);  // universe narrower than the dedup distance
  }
  return triangles_on(peaks, lo, hi);
}

FuzzyVariable make_variable(std::string name, double lo, double hi, std::vector<FuzzyRegion> regions) {
  check_universe(lo, hi);
  if (regions.empty()) throw Error(ErrorKind::InvalidArgument, "variable without regions");
  return FuzzyVariable{std::move(name), lo, hi, std::move(regions)};
}

RuleBase::RuleBase(std::vector<FuzzyVariable> inputs, FuzzyVariable output, std::vector<FuzzyRule> rules)
    : inputs_(std::move(inputs)), output_(std::move(output)), rules_(std::move(rules)) {
  if (inputs_.empty()) throw Error(ErrorKind::InvalidArgument, "rule base without input variables");
  for (const FuzzyRule& r : rules_) {
    if (r.antecedent.size() != inputs_.size()) {
      throw Error(ErrorKind::InvalidArgument, "rule antecedent length does not match inputs");
    }
    for (std::size_t v = 0; v < inputs_.size(); ++v) {
      if (r.antecedent[v] < 0 || r.antecedent[v] >= static_cast<int>(inputs_[v].regions.size())) {
        throw Error(ErrorKind::InvalidArgument, "rule references an unknown input region");
      }
    }
    if (r.consequent < 0 || r.consequent >= static_cast<int>(output_.regions.size())) {
      throw Error(ErrorKind::InvalidArgument, "rule references an unknown output region");
    }
    if (!(r.degree >= 0.0 && r.degree <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "rule degree outside [0, 1]");
    }
  }
  std::sort(rules_.begin(), rules_.end(),
            [](const FuzzyRule& a, const FuzzyRule& b) { return a.antecedent < b.antecedent; });
  for (std::size_t i = 1; i < rules_.size(); ++i) {
    if (rules_[i - 1].antecedent == rules_[i].antecedent) {
      throw Error(ErrorKind::InvalidArgument, "duplicate rule antecedent");
    }
  }

  std::size_t space = 1;
  strides_.assign(inputs_.size(), 0);
  for (std::size_t v = inputs_.size(); v-- > 0;) {
    strides_[v] = space;
    space *= inputs_[v].regions.size();
    if (space > kDenseLimit) break;
  }
  if (space <= kDenseLimit) {
    dense_.assign(space, -1);
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      std::size_t key = 0;
      for (std::size_t v = 0; v < inputs_.size(); ++v) key += strides_[v] * static_cast<std::size_t>(rules_[i].antecedent[v]);
      dense_[key] = static_cast<int>(i);
    }
  } else {
    strides_.clear();
    for (std::size_t i = 0; i < rules_.size(); ++i) sparse_.emplace(rules_[i].antecedent, static_cast<int>(i));
  }
}

const FuzzyRule* RuleBase::find(std::span<const int> antecedent) const {
  if (antecedent.size() != inputs_.size()) return nullptr;
  if (!dense_.empty()) {
    std::size_t key = 0;
    for (std::size_t v = 0; v < antecedent.size(); ++v) {
      if (antecedent[v] < 0 || antecedent[v] >= static_cast<int>(inputs_[v].regions.size())) return nullptr;
      key += strides_[v] * static_cast<std::size_t>(antecedent[v]);
    }
    const int idx = dense_[key];
    return idx < 0 ? nullptr : &rules_[static_cast<std::size_t>(idx)];
  }
  auto it = sparse_.find(std::vector<int>(antecedent.begin(), antecedent.end()));
  return it == sparse_.end() ? nullptr : &rules_[static_cast<std::size_t>(it->second)];
}

RuleBase generate_rules(std::span<const TrainingDatum> data, std::vector<FuzzyVariable> inputs,
                        FuzzyVariable output) {
  if (data.empty()) throw Error(ErrorKind::InvalidArgument, "empty training set");
  auto inside = [](const FuzzyVariable& var, double x) { return x >= var.lo && x <= var.hi; };

  std::map<std::vector<int>, FuzzyRule> best;
  for (const TrainingDatum& d : data) {
    if (d.inputs.size() != inputs.size()) {
      throw Error(ErrorKind::InvalidArgument, "training datum has the wrong number of inputs");
    }
    FuzzyRule rule;
    rule.antecedent.resize(inputs.size());
    rule.degree = 1.0;
    for (std::size_t v = 0; v < inputs.size(); ++v) {
      if (!inside(inputs[v], d.inputs[v])) {
        throw Error(ErrorKind::InvalidArgument, "training datum outside the universe of " + inputs[v].name);
      }
      const auto [region, mu] = inputs[v].best_region(d.inputs[v]);
      rule.antecedent[v] = region;
      rule.degree *= mu;
    }
    if (!inside(output, d.output)) {
      throw Error(ErrorKind::InvalidArgument, "training target outside the output universe");
    }
    const auto [region, mu] = output.best_region(d.output);
    rule.consequent = region;
    rule.degree *= mu;

    auto [it, inserted] = best.try_emplace(rule.antecedent, rule);
    if (!inserted) {
      FuzzyRule& kept = it->second;
      const bool stronger = rule.degree > kept.degree ||
                            (rule.degree == kept.degree && rule.consequent < kept.consequent);
      if (stronger) kept = std::move(rule);
    }
  }

  std::vector<FuzzyRule> rules;
  rules.reserve(best.size());
  for (auto& [key, rule] : best) rules.push_back(std::move(rule));
  return RuleBase(std::move(inputs), std::move(output), std::move(rules));
}

FuzzySet infer(const RuleBase& rb, std::span<const double> inputs) {
  Scratch scratch;
  FuzzySet set;
  aggregate(rb, inputs, set, scratch);
  return set;
}

double defuzzify_centroid(const FuzzySet& set) {
  auto c = centroid(set, 0, kOutputSamples - 1);
  if (!c) throw Error(ErrorKind::EmptyOutput, "fuzzy output set is empty");
  return *c;
}

std::optional<double> evaluate(const RuleBase& rb, std::span<const double> inputs) {
  thread_local Scratch scratch;
  thread_local FuzzySet set;
  auto range = aggregate(rb, inputs, set, scratch);
  if (!range) return std::nullopt;
  return centroid(set, range->first, range->second);
}

}  // namespace fex
