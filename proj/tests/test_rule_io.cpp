#include <doctest.h>

#include <random>
#include <string>

#include "fex/error.hpp"
#include "fex/rule_io.hpp"
#include "wm_oracle.hpp"

using namespace fex;

namespace {

void check_same(const RuleBase& a, const RuleBase& b) {
  CHECK(a.inputs() == b.inputs());
  CHECK(a.output() == b.output());
  CHECK(a.rules() == b.rules());
}

RuleBase small_base() {
  auto in = make_variable("x", 0, 10, partition_universe(0, 10, 3));
  auto out = make_variable("y", 0, 255, partition_universe(0, 255, 3));
  return RuleBase({in}, out, {{{0}, 0, 1.0}, {{2}, 2, 0.25}});
}

ErrorKind parse_kind(const std::string& text) {
  try {
    parse_rule_base(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::EmptyOutput;  // sentinel: parsed fine
}

std::string parse_message(const std::string& text) {
  try {
    parse_rule_base(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("serialized layout") {
  const std::string text = serialize(small_base());
  CHECK(text.rfind("fex-rulebase 1\ninput x 0 10 3\n", 0) == 0);
  CHECK(text.find("output y 0 255 3\n") != std::string::npos);
  CHECK(text.find("rules 2\n") != std::string::npos);
  CHECK(text.find("THEN y=") != std::string::npos);
  CHECK(text.find(" [0.25]\n") != std::string::npos);
}

TEST_CASE("round trip on generated rule bases (property)") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = wm_oracle::random_problem(rng);
    const RuleBase rb = generate_rules(p.data, p.inputs, p.output);
    const std::string text = serialize(rb);
    const RuleBase back = parse_rule_base(text);
    check_same(rb, back);
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("round trip keeps gaussian and trapezoidal regions") {
  std::vector<FuzzyRegion> regions = {
      {"dark", MembershipFunction::gaussian(0.1, 1.0 / 3.0), -1, 2},
      {"mid", MembershipFunction::trapezoidal(0.2, 0.7, 1.1, 1.9), -1, 2},
      {"hi", MembershipFunction::triangular(1, 2, 2), -1, 2},
  };
  auto in = make_variable("m", -1, 2, regions);
  auto out = make_variable("o", 0, 1, partition_universe(0, 1, 2));
  const RuleBase rb({in, in}, out, {{{0, 1}, 1, 0.1 + 0.2}, {{2, 2}, 0, 1e-300}});
  check_same(rb, parse_rule_base(serialize(rb)));
}

TEST_CASE("comments and blank lines are skipped") {
  std::string text = serialize(small_base());
  text = "# header comment\n\n" + text;
  text.insert(text.find("rules"), "   # indented comment\n\n");
  check_same(small_base(), parse_rule_base(text));
}

TEST_CASE("malformed input reports the line") {
  const std::string good = serialize(small_base());
  CHECK(parse_kind("") == ErrorKind::Format);
  CHECK(parse_kind("fex-rulebase 2\n") == ErrorKind::Format);

  std::string bad_number = good;
  bad_number.replace(bad_number.find("input x 0 10"), 12, "input x 0 1O");
  CHECK(parse_kind(bad_number) == ErrorKind::Format);
  CHECK(parse_message(bad_number).find("line 2") != std::string::npos);

  std::string unknown = good;
  unknown.replace(unknown.rfind("THEN y="), 7, "THEN y=Q");
  CHECK(parse_kind(unknown) == ErrorKind::Format);

  std::string trailing = good + "extra\n";
  CHECK(parse_kind(trailing) == ErrorKind::Format);

  std::string short_rules = good;
  short_rules.replace(short_rules.find("rules 2"), 7, "rules 3");
  CHECK(parse_kind(short_rules) == ErrorKind::Format);

  std::string bad_shape = good;
  bad_shape.replace(bad_shape.find("triangular"), 10, "hexagonal ");
  CHECK(parse_kind(bad_shape) == ErrorKind::Format);

  std::string bad_degree = good;
  bad_degree.replace(bad_degree.find("[0.25]"), 6, "0.25");
  CHECK(parse_kind(bad_degree) == ErrorKind::Format);

  // Duplicate antecedent is rejected by the rule base itself.
  std::string dup = good;
  dup.replace(dup.find("rules 2"), 7, "rules 3");
  dup += dup.substr(dup.rfind("IF "));
  CHECK(parse_kind(dup) == ErrorKind::Format);
}
