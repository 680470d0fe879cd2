#include "osserman/error.hpp"

namespace osserman {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::hypothesis_violation: return "hypothesis_violation";
    case ErrorKind::step_underflow: return "step_underflow";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::conflicting_evidence: return "conflicting_evidence";
    case ErrorKind::inconclusive: return "inconclusive";
    case ErrorKind::monotonicity_violation: return "monotonicity_violation";
    case ErrorKind::outside_domain: return "outside_domain";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::invalid_k: return "invalid_k";
  }
  return "unknown";
}

}  // namespace osserman
