#pragma once

#include <optional>
#include <string>
#include <vector>

#include "osserman/nonlin.hpp"
#include "osserman/quad.hpp"

namespace osserman {

/// The two degenerate elliptic operators: the maximal Pucci operator
/// M+_{0,1} (sum of positive eigenvalues) and the partial trace P+_k (sum of
/// the k largest eigenvalues).
struct Operator {
  enum class Kind { m_plus_01, p_plus_k };
  Kind kind = Kind::m_plus_01;
  int k = 0;

  static Operator m_plus_01() { return {Kind::m_plus_01, 0}; }
  static Operator p_plus_k(int k) { return {Kind::p_plus_k, k}; }
  std::string to_string() const;
};

struct Regime {
  enum class Tag { g_positive_limit, g_zero_limit, g_negative_limit };
  Tag tag = Tag::g_zero_limit;
  double g_infinity = 0.0;  // may be +inf
};

const char* to_string(Regime::Tag t);

/// Regime from the declared (tail-checked) limit of g. A constant expression
/// needs no declaration. Throws Error(hypothesis_violation) otherwise.
Regime detect_regime(const Nonlinearity& g);

enum class Condition { ns_plus, ns_zero, ns_minus };
const char* to_string(Condition c);

struct NamedProbe {
  std::string name;
  ProbeResult result;
};

/// Outcome of one existence condition. `result` is divergent when the
/// condition holds, convergent when it fails; `parts` lists every probe that
/// was run, in order.
struct ConditionReport {
  Condition condition = Condition::ns_plus;
  ProbeResult result;
  std::vector<NamedProbe> parts;
  std::string note;

  bool holds() const { return result.divergent(); }
  bool fails() const { return result.convergent(); }
};

/// q <= 1 and both integrals of 1/(t f)^(1/2) and 1/(t g+)^(1/(2-q)) diverge.
/// With g+ = 0 only the first integral is left (and q plays no role).
ConditionReport condition_ns_plus(const Nonlinearity& f, const Nonlinearity& g,
                                  double q);
/// Divergence of the integral of psi_0^(-1/2), psi from the weight h, with
/// the sufficient (s0) and necessary (n0) companions.
ConditionReport condition_ns_zero(const Nonlinearity& f, const Nonlinearity& g,
                                  double q);
/// Either the integral of 1/(t f)^(1/2) or that of f^(-1/q) diverges.
ConditionReport condition_ns_minus(const Nonlinearity& f,
                                   const Nonlinearity& g, double q);

enum class Existence { yes, no, inconclusive };
const char* to_string(Existence e);

struct Verdict {
  Operator op;
  Regime regime;
  ConditionReport condition;
  Existence exists_entire = Existence::inconclusive;
  /// False when only the necessary direction is known (P+_k with a g that
  /// takes negative values).
  bool characterization = true;
  std::vector<std::string> notes;
};

/// Existence of entire viscosity subsolutions of
///   F(D^2 u) >= f(u) + g(u) |Du|^q
/// for F = M+_{0,1} or P+_k. Requires f strictly increasing; P+_k with g
/// taking negative values yields only the necessary direction.
Verdict classify(const Nonlinearity& f, const Nonlinearity& g, double q,
                 const Operator& op);

}  // namespace osserman
