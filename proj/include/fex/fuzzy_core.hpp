#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fex/imaging.hpp"

namespace fex {

struct GaussianShape {
  double peak = 0.0;
  double fuzzifier = 1.0;
  friend bool operator==(const GaussianShape&, const GaussianShape&) = default;
};

struct TriangularShape {
  double a = 0.0, b = 0.0, c = 0.0;  // left foot, peak, right foot
  friend bool operator==(const TriangularShape&, const TriangularShape&) = default;
};

struct TrapezoidalShape {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  friend bool operator==(const TrapezoidalShape&, const TrapezoidalShape&) = default;
};

/// Evaluates into [0, 1]. A triangle with a == b (or b == c) is a shoulder:
/// it is 1 at the peak and 0 beyond the degenerate foot.
class MembershipFunction {
 public:
  using Shape = std::variant<GaussianShape, TriangularShape, TrapezoidalShape>;

  MembershipFunction() = default;
  explicit MembershipFunction(Shape shape);

  static MembershipFunction gaussian(double peak, double fuzzifier);
  static MembershipFunction triangular(double a, double b, double c);
  static MembershipFunction trapezoidal(double a, double b, double c, double d);

  double operator()(double x) const;

  /// Closed interval outside of which the function is zero.
  std::pair<double, double> support() const;
  double peak() const;

  const Shape& shape() const noexcept { return shape_; }

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;

 private:
  Shape shape_ = TriangularShape{};
};

struct FuzzyRegion {
  std::string label;
  MembershipFunction mf;
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const FuzzyRegion&, const FuzzyRegion&) = default;
};

/// A linguistic variable: a name, its universe and an overlapping partition.
struct FuzzyVariable {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<FuzzyRegion> regions;

  /// Index of the region with the largest membership (lowest index on ties)
  /// and that membership.
  std::pair<int, double> best_region(double x) const;

  friend bool operator==(const FuzzyVariable&, const FuzzyVariable&) = default;
};

/// Per-pixel membership grades in [0, 1].
struct FuzzyImage {
  int width = 0;
  int height = 0;
  std::vector<double> grades;
};

/// mu = exp(-(x_max - x)^2 / (2 f_h^2)) with x_max the image maximum.
FuzzyImage fuzzify_gaussian(const GrayImage& img, double fuzzifier);

/// Half the population standard deviation of the intensities; 1 for a
/// constant image.
double default_fuzzifier(const GrayImage& img);

/// Without anchors: k triangles with peaks evenly spaced over [lo, hi], feet
/// on the neighbouring peaks and shoulders at both ends.
///
/// With anchors: peaks at lo, the sorted anchors and hi, where a value
/// within 1 unit of the previous peak is dropped (hi replaces a final peak
/// closer than that). k is then only validated.
std::vector<FuzzyRegion> partition_universe(double lo, double hi, int k,
                                            std::optional<std::vector<double>> anchors = std::nullopt);

FuzzyVariable make_variable(std::string name, double lo, double hi, std::vector<FuzzyRegion> regions);

struct FuzzyRule {
  std::vector<int> antecedent;  // region index per input variable
  int consequent = 0;
  double degree = 0.0;

  friend bool operator==(const FuzzyRule&, const FuzzyRule&) = default;
};

/// Immutable rule base with at most one rule per antecedent combination.
class RuleBase {
 public:
  /// Throws InvalidArgument on duplicate antecedents, out-of-range region
  /// indices or degrees outside [0, 1]. Rules are stored sorted by
  /// antecedent.
  RuleBase(std::vector<FuzzyVariable> inputs, FuzzyVariable output, std::vector<FuzzyRule> rules);

  const std::vector<FuzzyVariable>& inputs() const noexcept { return inputs_; }
  const FuzzyVariable& output() const noexcept { return output_; }
  const std::vector<FuzzyRule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }

  const FuzzyRule* find(std::span<const int> antecedent) const;

  friend bool operator==(const RuleBase& a, const RuleBase& b) {
    return a.inputs_ == b.inputs_ && a.output_ == b.output_ && a.rules_ == b.rules_;
  }

 private:
  std::vector<FuzzyVariable> inputs_;
  FuzzyVariable output_;
  std::vector<FuzzyRule> rules_;
  // Dense antecedent -> rule index table (-1 = no rule) when the antecedent
  // space is small enough, otherwise an ordered map.
  std::vector<std::size_t> strides_;
  std::vector<int> dense_;
  std::map<std::vector<int>, int> sparse_;
};

struct TrainingDatum {
  std::vector<double> inputs;
  double output = 0.0;
};

/// Wang-Mendel rule generation. Each datum snaps every variable to its
/// maximum-membership region; the rule degree is the product of those
/// memberships. Conflicts keep the highest degree, equal degrees keep the
/// lower consequent index, so the result does not depend on data order.
RuleBase generate_rules(std::span<const TrainingDatum> data, std::vector<FuzzyVariable> inputs,
                        FuzzyVariable output);

inline constexpr int kOutputSamples = 256;

/// Output fuzzy set sampled at kOutputSamples evenly spaced points of
/// [lo, hi], endpoints included.
struct FuzzySet {
  double lo = 0.0;
  double hi = 255.0;
  std::array<double, kOutputSamples> mu{};

  double x(int i) const { return lo + (hi - lo) * i / (kOutputSamples - 1); }
};

/// Mamdani min-max inference. Inputs outside a universe are clamped to it.
/// No firing rule gives the all-zero set.
FuzzySet infer(const RuleBase& rb, std::span<const double> inputs);

/// Centre of gravity of the sampled set. Throws EmptyOutput on an all-zero
/// set.
double defuzzify_centroid(const FuzzySet& set);

/// infer followed by defuzzify_centroid, restricted to the samples the
/// fired consequents can reach. nullopt when no rule fires.
std::optional<double> evaluate(const RuleBase& rb, std::span<const double> inputs);

}  // namespace fex
