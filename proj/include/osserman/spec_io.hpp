#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "osserman/barrier.hpp"
#include "osserman/classify.hpp"
#include "osserman/ode.hpp"

namespace osserman {

/// Expression trees as nested JSON arrays:
///   "t", 2.5, ["const", k], ["affine", alpha, beta, e], ["exp", e],
///   ["softplus", e], ["power", e, p], ["pos", e], ["neg", e],
///   ["sum", e1, e2, ...], ["scale", k, e], ["log_power", p, e].
/// Throws Error(parse) on malformed input.
Expr expr_from_json(const nlohmann::json& j);
nlohmann::json expr_to_json(const Expr& e);

/// A parsed problem file:
///   {"f": expr | {"expr": expr, "claims": {...}, "limit": x, "growth": g},
///    "g": ..., "q": 1, "dimension": 3, "c": 3 (default: n, or k for P+_k),
///    "operator": "Mplus01" | {"Pk": k}, "a": 0,
///    "domain": {"ball": {"center": [...], "radius": R}}
///            | {"box": {"min": [...], "max": [...]}}
///            | {"half_space": {"normal": [...], "offset": b}},
///    "tolerances": {"step_rel": .., "r_max": .., "phi_cap": ..},
///    "declared": {"g_limit": x, "f_limit": x, "f_growth": g, "g_growth": g}}
/// Limits are numbers or "inf" / "-inf"; growth classes are "exponential",
/// "bounded", {"power": alpha} or {"log_power": alpha}.
struct RunSpec {
  ProblemSpec problem;
  Operator op;
  int dimension = 1;
  std::optional<DomainShape> domain;
  /// Resolved when g has a declared limit or is constant.
  std::optional<Regime> regime;
};

/// Throws Error(parse) for malformed documents and
/// Error(hypothesis_violation) when the data violate the standing
/// hypotheses (q in (0,2], c >= 1, f positive nondecreasing, g nondecreasing,
/// declared claims and asymptotics).
RunSpec parse_spec(const std::string& text);
RunSpec parse_spec_file(const std::string& path);

/// Comma-separated table with a header row. Cells are kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(std::istream& is);
/// Numeric cells printed with 17 significant digits, others verbatim.
void write_csv(std::ostream& os, const CsvTable& t);
std::string format_number(double v);

}  // namespace osserman
