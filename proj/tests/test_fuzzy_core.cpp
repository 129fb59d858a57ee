#include <doctest.h>

#include <cmath>
#include <random>

#include "fex/error.hpp"
#include "fex/fuzzy_core.hpp"
#include "test_util.hpp"
#include "wm_oracle.hpp"

using namespace fex;

namespace {

FuzzyVariable uniform(const std::string& name, double lo, double hi, int k) {
  return make_variable(name, lo, hi, partition_universe(lo, hi, k));
}

// Consequent regions are referenced by index; this builds a one-input base.
RuleBase one_input(std::vector<FuzzyRule> rules, int in_k = 3, int out_k = 5) {
  return RuleBase({uniform("x", 0, 10, in_k)}, uniform("y", 0, 255, out_k), std::move(rules));
}

}  // namespace

TEST_CASE("membership shapes") {
  const auto tri = MembershipFunction::triangular(0, 10, 20);
  CHECK(tri(10) == 1.0);
  CHECK(tri(5) == 0.5);
  CHECK(tri(15) == 0.5);
  CHECK(tri(-1) == 0.0);
  CHECK(tri(21) == 0.0);
  CHECK(tri.support() == std::pair{0.0, 20.0});

  const auto shoulder = MembershipFunction::triangular(0, 0, 10);
  CHECK(shoulder(0) == 1.0);
  CHECK(shoulder(-0.1) == 0.0);
  CHECK(shoulder(2.5) == 0.75);

  const auto trap = MembershipFunction::trapezoidal(0, 10, 20, 40);
  CHECK(trap(15) == 1.0);
  CHECK(trap(30) == 0.5);
  CHECK(trap.peak() == 15.0);

  const auto g = MembershipFunction::gaussian(100, 10);
  CHECK(g(100) == 1.0);
  CHECK(g(90) == doctest::Approx(std::exp(-0.5)));

  CHECK_THROWS_AS(MembershipFunction::triangular(5, 5, 5), Error);
  CHECK_THROWS_AS(MembershipFunction::triangular(5, 4, 6), Error);
  CHECK_THROWS_AS(MembershipFunction::gaussian(0, 0), Error);
  CHECK_THROWS_AS(MembershipFunction::trapezoidal(0, 3, 2, 4), Error);
}

TEST_CASE("membership values stay in [0, 1] (property)") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 300);
  for (int trial = 0; trial < 200; ++trial) {
    double p[4] = {u(rng), u(rng), u(rng), u(rng)};
    std::sort(p, p + 4);
    if (p[0] == p[3]) continue;
    const MembershipFunction fs[3] = {MembershipFunction::triangular(p[0], p[1], p[3]),
                                      MembershipFunction::trapezoidal(p[0], p[1], p[2], p[3]),
                                      MembershipFunction::gaussian(p[1], 1 + std::abs(p[2]))};
    for (int i = 0; i < 50; ++i) {
      const double x = u(rng);
      for (const auto& f : fs) {
        CHECK(f(x) >= 0.0);
        CHECK(f(x) <= 1.0);
      }
    }
  }
}

TEST_CASE("Gaussian fuzzification examples") {
  const FuzzyImage f = fuzzify_gaussian(GrayImage(2, 1, {100, 200}), 50.0);
  CHECK(f.grades[1] == 1.0);
  CHECK(f.grades[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(f.grades[0] == doctest::Approx(0.13534).epsilon(1e-4));

  const FuzzyImage g = fuzzify_gaussian(GrayImage(2, 1, {90, 120}), 30.0);
  CHECK(g.grades[0] == doctest::Approx(0.60653).epsilon(1e-5));

  CHECK_THROWS_AS(fuzzify_gaussian(GrayImage(1, 1), 0.0), Error);
  CHECK_THROWS_AS(fuzzify_gaussian(GrayImage(1, 1), -2.0), Error);
}

TEST_CASE("fuzzification is monotone and in (0, 1] (property)") {
  std::mt19937_64 rng(2);
  // Below ~6.8 the grade of a 255-level gap underflows to exactly 0.
  std::uniform_real_distribution<double> fh(7.0, 100);
  for (int trial = 0; trial < 30; ++trial) {
    const GrayImage img = testutil::random_gray(rng);
    const FuzzyImage f = fuzzify_gaussian(img, fh(rng));
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      CHECK(f.grades[i] > 0.0);
      CHECK(f.grades[i] <= 1.0);
      for (std::size_t j = 0; j < px.size(); j += 7) {
        if (px[i] <= px[j]) CHECK(f.grades[i] <= f.grades[j]);
      }
    }
  }
}

TEST_CASE("default fuzzifier") {
  CHECK(default_fuzzifier(GrayImage(3, 3, 40)) == 1.0);
  CHECK(default_fuzzifier(GrayImage(2, 1, {0, 100})) == doctest::Approx(25.0));
}

TEST_CASE("two-region partition of the intensity range") {
  const auto regions = partition_universe(0, 255, 2);
  REQUIRE(regions.size() == 2);
  CHECK(regions[0].mf.peak() == 0.0);
  CHECK(regions[1].mf.peak() == 255.0);
  CHECK(regions[0].mf(127.5) == 0.5);
  CHECK(regions[1].mf(127.5) == 0.5);
  CHECK(regions[0].label == "R0");
}

TEST_CASE("three-region partition at the midpoint") {
  const auto regions = partition_universe(0, 255, 3);
  CHECK(regions[0].mf(127.5) == 0.0);
  CHECK(regions[1].mf(127.5) == 1.0);
  CHECK(regions[2].mf(127.5) == 0.0);
}

TEST_CASE("anchored partitions") {
  const auto regions = partition_universe(0, 255, 2, std::vector<double>{120, 60, 60.5, 200, 254.5});
  std::vector<double> peaks;
  for (const auto& r : regions) peaks.push_back(r.mf.peak());
  CHECK(peaks == std::vector<double>{0, 60, 120, 200, 255});
  CHECK_THROWS_AS(partition_universe(0, 255, 3, std::vector<double>{300}), Error);
  CHECK_THROWS_AS(partition_universe(0, 255, 1), Error);
  CHECK_THROWS_AS(partition_universe(5, 5, 3), Error);
}

TEST_CASE("partitions cover their universe (property)") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const double lo = -50 + 100 * u(rng);
    const double hi = lo + 1 + 400 * u(rng);
    const int k = 2 + static_cast<int>(rng() % 20);
    const bool anchored = trial % 2 == 1;
    std::optional<std::vector<double>> anchors;
    if (anchored) {
      anchors.emplace();
      for (int i = 0; i < 10; ++i) anchors->push_back(lo + (hi - lo) * u(rng));
    }
    const FuzzyVariable v = make_variable("v", lo, hi, partition_universe(lo, hi, k, anchors));
    if (!anchored) CHECK(v.regions.size() == static_cast<std::size_t>(k));
    for (int s = 0; s <= 400; ++s) {
      const double x = std::min(hi, lo + (hi - lo) * s / 400.0);
      CAPTURE(x);
      CAPTURE(hi);
      CHECK(v.best_region(x).second >= 0.5);
    }
  }
}

TEST_CASE("Wang-Mendel degree of a single datum") {
  // x = 2 on [0, 10] with two regions: 0.8 in R0, 0.2 in R1.
  // y = 3.1 on [0, 10] with peaks at every integer: 0.9 in R3.
  const std::vector<TrainingDatum> data = {{{2.0}, 3.1}};
  const RuleBase rb = generate_rules(data, {uniform("x", 0, 10, 2)}, uniform("y", 0, 10, 11));
  REQUIRE(rb.size() == 1);
  CHECK(rb.rules()[0].antecedent == std::vector<int>{0});
  CHECK(rb.rules()[0].consequent == 3);
  CHECK(rb.rules()[0].degree == doctest::Approx(0.72));
}

TEST_CASE("conflicts keep the stronger rule") {
  // Both data snap to R0 on x; targets pick different consequents.
  const std::vector<TrainingDatum> data = {{{2.0}, 3.1}, {{3.0}, 7.5}};
  const RuleBase rb = generate_rules(data, {uniform("x", 0, 10, 2)}, uniform("y", 0, 10, 11));
  REQUIRE(rb.size() == 1);
  // 0.8 * 0.9 = 0.72 beats 0.7 * 0.5 = 0.35.
  CHECK(rb.rules()[0].consequent == 3);
  CHECK(rb.rules()[0].degree == doctest::Approx(0.72));
}

TEST_CASE("equal degrees keep the lower consequent regardless of order") {
  const std::vector<TrainingDatum> ab = {{{0.0}, 8.0}, {{0.0}, 2.0}};
  const std::vector<TrainingDatum> ba = {{{0.0}, 2.0}, {{0.0}, 8.0}};
  const RuleBase r1 = generate_rules(ab, {uniform("x", 0, 10, 2)}, uniform("y", 0, 10, 11));
  const RuleBase r2 = generate_rules(ba, {uniform("x", 0, 10, 2)}, uniform("y", 0, 10, 11));
  CHECK(r1 == r2);
  CHECK(r1.rules()[0].consequent == 2);
}

TEST_CASE("duplicated data give the same rule base") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const wm_oracle::Problem p = wm_oracle::random_problem(rng);
    std::vector<TrainingDatum> twice = p.data;
    twice.insert(twice.end(), p.data.begin(), p.data.end());
    CHECK(generate_rules(p.data, p.inputs, p.output) == generate_rules(twice, p.inputs, p.output));
  }
}

TEST_CASE("rule generation errors") {
  CHECK_THROWS_AS(generate_rules({}, {uniform("x", 0, 10, 2)}, uniform("y", 0, 10, 3)), Error);
  const std::vector<TrainingDatum> outside = {{{11.0}, 5.0}};
  CHECK_THROWS_AS(generate_rules(outside, {uniform("x", 0, 10, 2)}, uniform("y", 0, 10, 3)), Error);
  const std::vector<TrainingDatum> bad_target = {{{1.0}, -5.0}};
  CHECK_THROWS_AS(generate_rules(bad_target, {uniform("x", 0, 10, 2)}, uniform("y", 0, 10, 3)), Error);
}

TEST_CASE("Wang-Mendel properties against brute force (property)") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const wm_oracle::Problem p = wm_oracle::random_problem(rng);
    const RuleBase rb = generate_rules(p.data, p.inputs, p.output);
    const wm_oracle::Verdict v = wm_oracle::check(p, rb);
    CAPTURE(v.detail);
    CHECK(v.unique_antecedents);
    CHECK(v.covers_data);
    CHECK(v.max_degree_kept);
    CHECK(v.tie_break);
    std::size_t space = 1;
    for (const auto& var : p.inputs) space *= var.regions.size();
    CHECK(rb.size() <= std::min(p.data.size(), space));
    // Order independence.
    std::vector<TrainingDatum> reversed(p.data.rbegin(), p.data.rend());
    CHECK(generate_rules(reversed, p.inputs, p.output) == rb);
  }
}

TEST_CASE("rule base validation and lookup") {
  CHECK_THROWS_AS(one_input({{{0}, 0, 0.5}, {{0}, 1, 0.5}}), Error);
  CHECK_THROWS_AS(one_input({{{3}, 0, 0.5}}), Error);
  CHECK_THROWS_AS(one_input({{{0}, 5, 0.5}}), Error);
  CHECK_THROWS_AS(one_input({{{0}, 0, 1.5}}), Error);
  CHECK_THROWS_AS(one_input({{{0, 1}, 0, 0.5}}), Error);
  const RuleBase rb = one_input({{{2}, 4, 1.0}, {{0}, 1, 0.5}});
  CHECK(rb.rules()[0].antecedent == std::vector<int>{0});
  const int key[1] = {2};
  REQUIRE(rb.find(key) != nullptr);
  CHECK(rb.find(key)->consequent == 4);
  const int missing[1] = {1};
  CHECK(rb.find(missing) == nullptr);
}

TEST_CASE("sparse and dense lookup agree") {
  // 7 inputs x 10 regions exceeds the dense table size.
  std::vector<FuzzyVariable> inputs;
  for (int v = 0; v < 7; ++v) inputs.push_back(uniform("x" + std::to_string(v), 0, 1, 10));
  std::vector<FuzzyRule> rules = {{{1, 2, 3, 4, 5, 6, 7}, 1, 0.5}, {{0, 0, 0, 0, 0, 0, 9}, 2, 1.0}};
  const RuleBase rb(inputs, uniform("y", 0, 1, 3), rules);
  const int hit[7] = {0, 0, 0, 0, 0, 0, 9};
  const int miss[7] = {0, 0, 0, 0, 0, 0, 8};
  REQUIRE(rb.find(hit) != nullptr);
  CHECK(rb.find(hit)->consequent == 2);
  CHECK(rb.find(miss) == nullptr);
}

TEST_CASE("full firing reproduces the consequent") {
  const RuleBase rb = one_input({{{1}, 2, 1.0}});
  const double x[1] = {5.0};
  const FuzzySet set = infer(rb, x);
  const auto& mf = rb.output().regions[2].mf;
  for (int i = 0; i < kOutputSamples; ++i) CHECK(set.mu[static_cast<std::size_t>(i)] == mf(set.x(i)));
}

TEST_CASE("no firing gives the empty set") {
  const RuleBase rb = one_input({{{0}, 2, 1.0}});
  const double x[1] = {10.0};
  const FuzzySet set = infer(rb, x);
  for (double m : set.mu) CHECK(m == 0.0);
  CHECK_THROWS_AS(defuzzify_centroid(set), Error);
  try {
    defuzzify_centroid(set);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyOutput);
  }
  CHECK_FALSE(evaluate(rb, x).has_value());
}

TEST_CASE("two rules at 0.3 and 0.7 with disjoint consequents") {
  // Input x = 3 on [0, 10] with regions peaking at 0 and 10: 0.7 and 0.3.
  // Output regions 0 and 4 of five on [0, 255] do not overlap.
  const RuleBase rb = one_input({{{0}, 0, 1.0}, {{1}, 4, 1.0}}, 2, 5);
  const double x[1] = {3.0};
  const FuzzySet set = infer(rb, x);
  double left = 0, right = 0;
  for (int i = 0; i < kOutputSamples; ++i) {
    (set.x(i) < 127.5 ? left : right) = std::max(set.x(i) < 127.5 ? left : right, set.mu[std::size_t(i)]);
  }
  CHECK(left == doctest::Approx(0.7));
  CHECK(right == doctest::Approx(0.3));
}

TEST_CASE("centroid examples") {
  FuzzySet tri;
  for (int i = 0; i < kOutputSamples; ++i) {
    tri.mu[std::size_t(i)] = MembershipFunction::triangular(78, 128, 178)(tri.x(i));
  }
  CHECK(std::abs(defuzzify_centroid(tri) - 128.0) <= 1.0);

  FuzzySet spike;
  spike.mu[200] = 1.0;
  CHECK(defuzzify_centroid(spike) == 200.0);

  FuzzySet two;
  two.mu[50] = 1.0;
  two.mu[150] = 1.0;
  CHECK(defuzzify_centroid(two) == 100.0);
}

TEST_CASE("inference bounds and fast path equivalence (property)") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 60; ++trial) {
    const wm_oracle::Problem p = wm_oracle::random_problem(rng);
    const RuleBase rb = generate_rules(p.data, p.inputs, p.output);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    for (int q = 0; q < 40; ++q) {
      std::vector<double> x;
      for (const auto& v : p.inputs) x.push_back(v.lo + (v.hi - v.lo) * u(rng));
      const FuzzySet set = infer(rb, x);
      double strongest = 0.0;
      for (double m : set.mu) strongest = std::max(strongest, m);
      CHECK(strongest <= 1.0);
      const auto fast = evaluate(rb, x);
      if (strongest == 0.0) {
        CHECK_FALSE(fast.has_value());
        continue;
      }
      const double c = defuzzify_centroid(set);
      CHECK(c >= p.output.lo);
      CHECK(c <= p.output.hi);
      REQUIRE(fast.has_value());
      CHECK(*fast == c);
    }
  }
}

TEST_CASE("samples never exceed the strongest firing (property)") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const wm_oracle::Problem p = wm_oracle::random_problem(rng);
    const RuleBase rb = generate_rules(p.data, p.inputs, p.output);
    std::vector<double> x;
    for (const auto& v : p.inputs) x.push_back(v.lo + (v.hi - v.lo) * std::uniform_real_distribution<double>(0, 1)(rng));
    double max_fire = 0.0;
    for (const auto& r : rb.rules()) {
      double w = 1.0;
      for (std::size_t v = 0; v < x.size(); ++v) w = std::min(w, p.inputs[v].regions[std::size_t(r.antecedent[v])].mf(x[v]));
      max_fire = std::max(max_fire, w);
    }
    const FuzzySet set = infer(rb, x);
    for (double m : set.mu) CHECK(m <= max_fire);
  }
}

TEST_CASE("identity training approximates the identity") {
  std::vector<TrainingDatum> data;
  for (int v = 0; v <= 255; ++v) data.push_back({{double(v)}, double(v)});
  const RuleBase rb = generate_rules(data, {uniform("x", 0, 255, 15)}, uniform("y", 0, 255, 15));
  const double half_width = 255.0 / 14.0 / 2.0;
  for (int v = 0; v <= 255; ++v) {
    const double x[1] = {double(v)};
    const auto y = evaluate(rb, x);
    REQUIRE(y.has_value());
    CHECK(std::abs(*y - v) <= half_width);
  }
}
