#include "fex/rule_io.hpp"

#include <charconv>
#include <sstream>
#include <vector>

#include "fex/error.hpp"

namespace fex {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Format, "rule base line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) bad(line, "bad number '" + std::string(s) + "'");
  return v;
}

long to_long(std::string_view s, std::size_t line) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 0) {
    bad(line, "bad count '" + std::string(s) + "'");
  }
  return v;
}

void write_variable(std::ostringstream& os, std::string_view kind, const FuzzyVariable& var) {
  os << kind << ' ' << var.name << ' ' << fmt(var.lo) << ' ' << fmt(var.hi) << ' ' << var.regions.size() << '\n';
  for (const FuzzyRegion& r : var.regions) {
    os << "region " << r.label << ' ';
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, GaussianShape>) {
            os << "gaussian " << fmt(s.peak) << ' ' << fmt(s.fuzzifier);
          } else if constexpr (std::is_same_v<T, TriangularShape>) {
            os << "triangular " << fmt(s.a) << ' ' << fmt(s.b) << ' ' << fmt(s.c);
          } else {
            os << "trapezoidal " << fmt(s.a) << ' ' << fmt(s.b) << ' ' << fmt(s.c) << ' ' << fmt(s.d);
          }
        },
        r.mf.shape());
    os << '\n';
  }
}

class Reader {
 public:
  explicit Reader(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      ++number_;
      auto toks = tokens(line);
      if (!toks.empty() && toks.front().front() != '#') lines_.push_back({number_, std::move(toks)});
      start = end + 1;
    }
  }

  const std::vector<std::string_view>& next(std::string_view expect_kind) {
    if (pos_ >= lines_.size()) bad(number_, "unexpected end of input, wanted '" + std::string(expect_kind) + "'");
    const auto& l = lines_[pos_];
    if (l.toks.front() != expect_kind) {
      bad(l.number, "expected '" + std::string(expect_kind) + "', found '" + std::string(l.toks.front()) + "'");
    }
    current_ = l.number;
    ++pos_;
    return l.toks;
  }

  bool peek(std::string_view kind) const { return pos_ < lines_.size() && lines_[pos_].toks.front() == kind; }
  bool done() const { return pos_ >= lines_.size(); }
  std::size_t line() const { return current_; }

 private:
  struct Line {
    std::size_t number;
    std::vector<std::string_view> toks;
  };
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
  std::size_t current_ = 0;
};

FuzzyVariable read_variable(Reader& in, std::string_view kind) {
  const auto& head = in.next(kind);
  if (head.size() != 5) bad(in.line(), std::string(kind) + " needs: name lo hi count");
  const std::size_t head_line = in.line();
  std::string name(head[1]);
  const double lo = to_double(head[2], head_line);
  const double hi = to_double(head[3], head_line);
  const long count = to_long(head[4], head_line);
  std::vector<FuzzyRegion> regions;
  for (long i = 0; i < count; ++i) {
    const auto& t = in.next("region");
    const std::size_t ln = in.line();
    if (t.size() < 3) bad(ln, "region needs a label and a shape");
    std::vector<double> p;
    for (std::size_t k = 3; k < t.size(); ++k) p.push_back(to_double(t[k], ln));
    try {
      MembershipFunction mf;
      if (t[2] == "gaussian" && p.size() == 2) {
        mf = MembershipFunction::gaussian(p[0], p[1]);
      } else if (t[2] == "triangular" && p.size() == 3) {
        mf = MembershipFunction::triangular(p[0], p[1], p[2]);
      } else if (t[2] == "trapezoidal" && p.size() == 4) {
        mf = MembershipFunction::trapezoidal(p[0], p[1], p[2], p[3]);
      } else {
        bad(ln, "unknown shape or wrong parameter count");
      }
      regions.push_back({std::string(t[1]), mf, lo, hi});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Format) throw;
      bad(ln, e.what());
    }
  }
  try {
    return make_variable(std::move(name), lo, hi, std::move(regions));
  } catch (const Error& e) {
    bad(head_line, e.what());
  }
}

int region_index(const FuzzyVariable& var, std::string_view label, std::size_t line) {
  for (std::size_t i = 0; i < var.regions.size(); ++i) {
    if (var.regions[i].label == label) return static_cast<int>(i);
  }
  bad(line, "unknown region '" + std::string(label) + "' for " + var.name);
}

// "name=label" -> (name, label)
std::pair<std::string_view, std::string_view> assignment(std::string_view tok, std::size_t line) {
  const auto eq = tok.find('=');
  if (eq == std::string_view::npos) bad(line, "expected var=region, found '" + std::string(tok) + "'");
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

}  // namespace

std::string serialize(const RuleBase& rb) {
  std::ostringstream os;
  os << "fex-rulebase 1\n";
  for (const FuzzyVariable& v : rb.inputs()) write_variable(os, "input", v);
  write_variable(os, "output", rb.output());
  os << "rules " << rb.size() << '\n';
  for (const FuzzyRule& r : rb.rules()) {
    os << "IF ";
    for (std::size_t v = 0; v < r.antecedent.size(); ++v) {
      if (v > 0) os << " AND ";
      os << rb.inputs()[v].name << '=' << rb.inputs()[v].regions[static_cast<std::size_t>(r.antecedent[v])].label;
    }
    os << " THEN " << rb.output().name << '=' << rb.output().regions[static_cast<std::size_t>(r.consequent)].label
       << " [" << fmt(r.degree) << "]\n";
  }
  return os.str();
}

RuleBase parse_rule_base(std::string_view text) {
  Reader in(text);
  const auto& magic = in.next("fex-rulebase");
  if (magic.size() != 2 || magic[1] != "1") bad(in.line(), "unsupported rule base version");

  std::vector<FuzzyVariable> inputs;
  while (in.peek("input")) inputs.push_back(read_variable(in, "input"));
  if (inputs.empty()) bad(in.line(), "no input variables");
  FuzzyVariable output = read_variable(in, "output");

  const auto& count_line = in.next("rules");
  if (count_line.size() != 2) bad(in.line(), "rules needs a count");
  const long count = to_long(count_line[1], in.line());

  std::vector<FuzzyRule> rules;
  rules.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const auto& t = in.next("IF");
    const std::size_t ln = in.line();
    // IF a=x AND b=y ... THEN out=z [d]
    const std::size_t expected = 1 + (2 * inputs.size() - 1) + 3;
    if (t.size() != expected) bad(ln, "rule has the wrong number of terms");
    FuzzyRule rule;
    for (std::size_t v = 0; v < inputs.size(); ++v) {
      const std::size_t k = 1 + 2 * v;
      if (v > 0 && t[k - 1] != "AND") bad(ln, "expected AND");
      const auto [name, label] = assignment(t[k], ln);
      if (name != inputs[v].name) bad(ln, "expected variable " + inputs[v].name);
      rule.antecedent.push_back(region_index(inputs[v], label, ln));
    }
    if (t[expected - 2 - 1] != "THEN") bad(ln, "expected THEN");
    const auto [name, label] = assignment(t[expected - 2], ln);
    if (name != output.name) bad(ln, "expected output variable " + output.name);
    rule.consequent = region_index(output, label, ln);
    const std::string_view deg = t[expected - 1];
    if (deg.size() < 3 || deg.front() != '[' || deg.back() != ']') bad(ln, "degree must be written as [d]");
    rule.degree = to_double(deg.substr(1, deg.size() - 2), ln);
    rules.push_back(std::move(rule));
  }
  if (!in.done()) bad(in.line() + 1, "trailing content after rules");

  try {
    return RuleBase(std::move(inputs), std::move(output), std::move(rules));
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, std::string("rule base: ") + e.what());
  }
}

}  // namespace fex
