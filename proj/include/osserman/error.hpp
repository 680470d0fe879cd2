#pragma once

#include <stdexcept>
#include <string>

namespace osserman {

enum class ErrorKind {
  parse,
  hypothesis_violation,
  step_underflow,
  non_finite,
  conflicting_evidence,
  inconclusive,
  monotonicity_violation,
  outside_domain,
  out_of_range,
  invalid_k,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace osserman
