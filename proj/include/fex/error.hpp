#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fex {

enum class ErrorKind {
  Io,
  Format,
  UnsupportedDepth,
  InvalidArgument,
  DimensionMismatch,
  Degenerate,
  NonConvergent,
  EmptyOutput,
  EmptyRuleBase,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` is stable and
/// machine-readable, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fex
