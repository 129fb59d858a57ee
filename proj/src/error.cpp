#include "fex/error.hpp"

namespace fex {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::UnsupportedDepth: return "unsupported_bit_depth";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NonConvergent: return "non_convergent";
    case ErrorKind::EmptyOutput: return "empty_output";
    case ErrorKind::EmptyRuleBase: return "empty_rule_base";
  }
  return "unknown";
}

}  // namespace fex
