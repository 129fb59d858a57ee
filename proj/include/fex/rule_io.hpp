#pragma once

#include <string>
#include <string_view>

#include "fex/fuzzy_core.hpp"

namespace fex {

/// Line-oriented text form of a rule base:
///
///   fex-rulebase 1
///   input <name> <lo> <hi> <region count>
///   region <label> triangular <a> <b> <c>
///   ...
///   output <name> <lo> <hi> <region count>
///   region ...
///   rules <count>
///   IF <var>=<label> AND <var>=<label> THEN <out>=<label> [<degree>]
///
/// Reals use the shortest representation that parses back to the same
/// double, so parse_rule_base(serialize(rb)) == rb.
std::string serialize(const RuleBase& rb);
RuleBase parse_rule_base(std::string_view text);

}  // namespace fex
