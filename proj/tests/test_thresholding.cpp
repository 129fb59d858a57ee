#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fex/error.hpp"
#include "fex/synthetic.hpp"
#include "fex/thresholding.hpp"
#include "test_util.hpp"
#include "threshold_oracle.hpp"

using namespace fex;

namespace {

Histogram spikes(std::initializer_list<std::pair<int, std::uint64_t>> bins) {
  std::array<std::uint64_t, kGrayLevels> b{};
  for (auto [v, c] : bins) b[static_cast<std::size_t>(v)] = c;
  return Histogram(b);
}

int t_of(const Histogram& h, ThresholdMethod m) { return compute_threshold(h, m).t; }

ErrorKind failure_of(const Histogram& h, ThresholdMethod m) {
  try {
    compute_threshold(h, m);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected failure for ", to_string(m));
  return ErrorKind::Io;
}

// Two symmetric triangles peaking at 60 and 180 with half-width 20.
Histogram two_triangles() {
  std::array<std::uint64_t, kGrayLevels> b{};
  for (int d = -20; d <= 20; ++d) {
    b[static_cast<std::size_t>(60 + d)] = static_cast<std::uint64_t>(21 - std::abs(d));
    b[static_cast<std::size_t>(180 + d)] = static_cast<std::uint64_t>(21 - std::abs(d));
  }
  return Histogram(b);
}

}  // namespace

TEST_CASE("method names follow the report spelling and round-trip") {
  const std::vector<std::string> names = {"Default",  "Huang",   "Intermodes", "IsoData",      "Li",
                                          "MaxEntropy", "Mean",  "MinError",   "Minimum",      "Moments",
                                          "Otsu",     "Percentile", "RenyiEntropy", "Shanbhag", "Triangle",
                                          "Yen"};
  REQUIRE(names.size() == kMethodCount);
  for (std::size_t i = 0; i < kMethodCount; ++i) {
    CHECK(to_string(kAllMethods[i]) == names[i]);
    CHECK(parse_method(names[i]) == kAllMethods[i]);
    CHECK(method_index(kAllMethods[i]) == i);
  }
  CHECK_FALSE(parse_method("otsu").has_value());
  CHECK_FALSE(parse_method("Proposed").has_value());
}

TEST_CASE("histogram counts") {
  const Histogram h = histogram(GrayImage(2, 2, {0, 0, 255, 255}));
  CHECK(h[0] == 2);
  CHECK(h[255] == 2);
  CHECK(h.total() == 4);
  CHECK(h.populated_count() == 2);
  CHECK(h.first_populated() == 0);
  CHECK(h.last_populated() == 255);

  const Histogram c = histogram(GrayImage(2, 2, 7));
  CHECK(c[7] == 4);
  CHECK(c.total() == 4);

  CHECK_THROWS_AS(histogram(GrayImage{}), Error);
  CHECK(Histogram{}.first_populated() == -1);
}

TEST_CASE("Otsu on two equal spikes picks the lowest maximiser") {
  CHECK(t_of(spikes({{100, 500}, {200, 500}}), ThresholdMethod::Otsu) == 100);
}

TEST_CASE("Mean of a uniform histogram floors 127.5") {
  std::array<std::uint64_t, kGrayLevels> b{};
  b.fill(3);
  CHECK(t_of(Histogram(b), ThresholdMethod::Mean) == 127);
}

TEST_CASE("MaxEntropy on two spikes equals the exhaustive maximiser") {
  const Histogram h = spikes({{100, 500}, {200, 500}});
  const auto opt = oracle::exhaustive(ThresholdMethod::MaxEntropy, h.bins());
  REQUIRE(opt.has_value());
  CHECK(t_of(h, ThresholdMethod::MaxEntropy) == opt->t);
}

TEST_CASE("hand-derived values on two equal spikes") {
  const Histogram h = spikes({{100, 500}, {200, 500}});
  CHECK(t_of(h, ThresholdMethod::Mean) == 150);
  CHECK(t_of(h, ThresholdMethod::Percentile) == 100);
  CHECK(t_of(h, ThresholdMethod::IsoData) == 150);
  CHECK(t_of(h, ThresholdMethod::Default) == 150);
  // Tsai's p0 is exactly 1/2; the first bin whose cumulative share exceeds
  // it is 200, clamped into the split range.
  CHECK(t_of(h, ThresholdMethod::Moments) == 199);
}

TEST_CASE("Intermodes and Minimum on an already bimodal histogram") {
  const Histogram h = two_triangles();
  CHECK(t_of(h, ThresholdMethod::Intermodes) == 120);
  CHECK(t_of(h, ThresholdMethod::Minimum) == 81);
}

TEST_CASE("Intermodes fails on a flat-topped unimodal histogram") {
  std::array<std::uint64_t, kGrayLevels> b{};
  for (int i = 100; i <= 110; ++i) b[static_cast<std::size_t>(i)] = 5;
  CHECK(failure_of(Histogram(b), ThresholdMethod::Intermodes) == ErrorKind::NonConvergent);
  CHECK(failure_of(Histogram(b), ThresholdMethod::Minimum) == ErrorKind::NonConvergent);
}

TEST_CASE("Triangle with a left tail") {
  // Tail of ones on 1..9, peak 10 at bin 10: the line runs from the empty
  // bin 0 to the peak and the farthest point is bin 9.
  std::array<std::uint64_t, kGrayLevels> b{};
  for (int i = 1; i <= 9; ++i) b[static_cast<std::size_t>(i)] = 1;
  b[10] = 10;
  const Histogram h(b);
  CHECK(t_of(h, ThresholdMethod::Triangle) == 8);

  // The mirror image has its tail on the right and the mirrored answer.
  std::array<std::uint64_t, kGrayLevels> m{};
  for (int i = 0; i < kGrayLevels; ++i) m[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(255 - i)];
  CHECK(t_of(Histogram(m), ThresholdMethod::Triangle) == 255 - 8);
}

TEST_CASE("Default ignores the extreme bins, IsoData does not") {
  const Histogram h = spikes({{0, 1000}, {100, 10}, {120, 10}, {255, 1000}});
  CHECK(t_of(h, ThresholdMethod::Default) == 110);
  CHECK(t_of(h, ThresholdMethod::IsoData) == 129);
}

TEST_CASE("a single populated bin is degenerate for every method") {
  const Histogram h = spikes({{42, 9}});
  for (ThresholdMethod m : kAllMethods) CHECK(failure_of(h, m) == ErrorKind::Degenerate);
  CHECK_THROWS_AS(compute_threshold(Histogram{}, ThresholdMethod::Otsu), Error);
}

TEST_CASE("MinError needs two classes with spread") {
  CHECK(failure_of(spikes({{10, 5}, {200, 5}}), ThresholdMethod::MinError) == ErrorKind::Degenerate);
  CHECK_NOTHROW(compute_threshold(spikes({{10, 5}, {11, 5}, {200, 5}, {201, 5}}), ThresholdMethod::MinError));
}

TEST_CASE("threshold_all has one entry per method and records failures") {
  const ThresholdMap all = threshold_all(GrayImage(4, 4, 90));
  CHECK(all.size() == kMethodCount);
  for (const auto& [m, e] : all) {
    CHECK_FALSE(e.ok());
    CHECK(e.error == ErrorKind::Degenerate);
  }
  CHECK(to_csv(all).find("Otsu,nan,false\n") != std::string::npos);
}

TEST_CASE("two-tone image separates the modes under every method") {
  const ThresholdMap all = threshold_all(two_tone(256, 256, 50, 200));
  CHECK(all.size() == kMethodCount);
  for (const auto& [m, e] : all) {
    if (!e.ok()) {
      CHECK(e.error == ErrorKind::Degenerate);  // MinError: both classes are constant
      continue;
    }
    CAPTURE(to_string(m));
    CHECK(e.result->t >= 50);
    CHECK(e.result->t <= 199);
  }
}

TEST_CASE("CSV serialization") {
  const ThresholdMap all = threshold_all(spikes({{100, 500}, {200, 500}}));
  const std::string csv = to_csv(all);
  CHECK(csv.rfind("method,t,converged\nDefault,150,true\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
}

TEST_CASE("apply_threshold examples") {
  GrayImage ramp(256, 1);
  for (int i = 0; i < 256; ++i) ramp.at(i, 0) = static_cast<std::uint8_t>(i);
  const GrayImage none = apply_threshold(ramp, 255);
  CHECK(std::all_of(none.pixels().begin(), none.pixels().end(), [](auto v) { return v == 0; }));
  CHECK(apply_threshold(GrayImage(2, 1, {0, 1}), 0) == GrayImage(2, 1, {0, 255}));
  const GrayImage half = apply_threshold(ramp, 127);
  CHECK(std::count(half.pixels().begin(), half.pixels().end(), 0) == 128);
  CHECK_THROWS_AS(apply_threshold(ramp, 256), Error);
  CHECK_THROWS_AS(apply_threshold(ramp, -1), Error);
}

TEST_CASE("results stay inside the populated split range (property)") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const Histogram h(oracle::random_mixture(rng, 2000));
    for (const auto& [m, e] : threshold_all(h)) {
      if (!e.ok()) continue;
      CAPTURE(to_string(m));
      CHECK(e.result->t >= h.first_populated());
      CHECK(e.result->t < h.last_populated());
    }
  }
}

TEST_CASE("criterion methods agree with the brute-force oracle (property)") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    const oracle::Counts c = oracle::random_mixture(rng, 3000);
    const Histogram h(c);
    for (ThresholdMethod m : kAllMethods) {
      if (!oracle::is_criterion_method(m) || m == ThresholdMethod::RenyiEntropy) continue;
      const auto opt = oracle::exhaustive(m, c);
      CAPTURE(to_string(m));
      if (!opt) {
        CHECK_THROWS_AS(compute_threshold(h, m), Error);
        continue;
      }
      CHECK(t_of(h, m) == opt->t);
    }
    const auto ts = detail::renyi_component_thresholds(h);
    const double alphas[3] = {0.5, 1.0, 2.0};
    for (int k = 0; k < 3; ++k) CHECK(ts[static_cast<std::size_t>(k)] == oracle::exhaustive_renyi(c, alphas[k])->t);
    CHECK(t_of(h, ThresholdMethod::RenyiEntropy) == oracle::renyi_combined(c, ts));
  }
}

TEST_CASE("IsoData result is a fixed point of the intermeans step (property)") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::Counts c = oracle::random_mixture(rng, 1500);
    const Histogram h(c);
    const ThresholdResult r = compute_threshold(h, ThresholdMethod::IsoData);
    if (!r.converged) continue;
    double s0 = 0, n0 = 0, s1 = 0, n1 = 0;
    for (int i = 0; i < 256; ++i) {
      (i <= r.t ? s0 : s1) += double(i) * double(c[static_cast<std::size_t>(i)]);
      (i <= r.t ? n0 : n1) += double(c[static_cast<std::size_t>(i)]);
    }
    const int target = static_cast<int>(std::lround((s0 / n0 + s1 / n1) / 2.0));
    CHECK(r.t == std::clamp(target, h.first_populated(), h.last_populated() - 1));
  }
}

TEST_CASE("thresholds depend only on the histogram (property)") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage img = testutil::random_gray(rng, 32);
    GrayImage shuffled = img;
    std::shuffle(shuffled.pixels().begin(), shuffled.pixels().end(), rng);
    const ThresholdMap a = threshold_all(img);
    const ThresholdMap b = threshold_all(shuffled);
    for (ThresholdMethod m : kAllMethods) {
      CHECK(a.at(m).ok() == b.at(m).ok());
      if (a.at(m).ok()) CHECK(a.at(m).result->t == b.at(m).result->t);
    }
  }
}

TEST_CASE("shifting intensities shifts Mean and Percentile (property)") {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> shift(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    oracle::Counts c = oracle::random_mixture(rng, 800);
    const int lo = Histogram(c).first_populated();
    const int hi = Histogram(c).last_populated();
    if (hi - lo < 1) continue;
    const int k = std::min(shift(rng), 255 - hi);
    oracle::Counts moved{};
    for (int i = 0; i + k < 256; ++i) moved[static_cast<std::size_t>(i + k)] = c[static_cast<std::size_t>(i)];
    for (ThresholdMethod m : {ThresholdMethod::Mean, ThresholdMethod::Percentile}) {
      CAPTURE(to_string(m));
      CHECK(t_of(Histogram(moved), m) == t_of(Histogram(c), m) + k);
    }
  }
}

TEST_CASE("binary output has only 0 and 255 (property)") {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> t(0, 255);
  for (int trial = 0; trial < 50; ++trial) {
    const GrayImage img = testutil::random_gray(rng);
    const GrayImage out = apply_threshold(img, t(rng));
    for (auto v : out.pixels()) CHECK((v == 0 || v == 255));
  }
}

TEST_CASE("methods are distinct on a skewed histogram") {
  std::mt19937_64 rng(707);
  const ThresholdMap all = threshold_all(Histogram(oracle::random_mixture(rng, 5000)));
  std::set<int> distinct;
  for (const auto& [m, e] : all) {
    if (e.ok()) distinct.insert(e.result->t);
  }
  CHECK(distinct.size() >= 4);
}
