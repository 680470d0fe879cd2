#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "osserman/expr.hpp"
#include "osserman/quad.hpp"

namespace osserman {

struct GrowthClass {
  enum class Kind { power, log_power, exponential, bounded };
  Kind kind = Kind::bounded;
  double alpha = 0.0;

  static GrowthClass power(double a) { return {Kind::power, a}; }
  static GrowthClass log_power(double a) { return {Kind::log_power, a}; }
  static GrowthClass exponential() { return {Kind::exponential, 0.0}; }
  static GrowthClass bounded() { return {Kind::bounded, 0.0}; }

  std::string to_string() const;
};

struct ClaimedProperties {
  bool nondecreasing = false;
  bool strictly_increasing = false;
  bool positive = false;
  bool nonnegative = false;
  bool nonpositive = false;
};

/// A verified nonlinearity: an expression plus the properties the analysis
/// relies on. Construction checks every claim (structurally when the tree
/// proves it, by dense sampling otherwise) and cross-checks the declared
/// asymptotics on the tail; any mismatch throws Error(hypothesis_violation).
class Nonlinearity {
 public:
  Nonlinearity(Expr expr, ClaimedProperties claims = {},
               std::optional<double> limit_at_infinity = std::nullopt,
               std::optional<GrowthClass> growth = std::nullopt);

  double operator()(double t) const { return expr_(t); }

  const Expr& expr() const { return expr_; }
  const ClaimedProperties& claims() const { return claims_; }
  std::optional<double> limit_at_infinity() const { return limit_; }
  std::optional<GrowthClass> growth() const { return growth_; }

  /// Growth class translated for the symbolic divergence rules.
  std::optional<Asymptote> asymptote() const;

 private:
  Expr expr_;
  ClaimedProperties claims_;
  std::optional<double> limit_;
  std::optional<GrowthClass> growth_;
};

enum class Profile { ode, comparison };
/// Which hypotheses apply: f must be positive and nondecreasing (strictly
/// increasing under the comparison profile); g only nondecreasing.
enum class Role { f, g };

struct PropertyCheck {
  std::string property;
  bool passed = true;
  std::string method;            // "structural" or "sampled"
  std::optional<double> witness;  // a t where the property fails
  std::optional<double> witness_next;  // second point of a failing pair
};

struct HypothesisReport {
  std::vector<PropertyCheck> checks;
  bool passed() const;
  std::string summary() const;
};

HypothesisReport verify_hypotheses(const Nonlinearity& n, Profile profile,
                                   Role role = Role::f);

/// The dense sample set used by every sampled property check: 10^4 uniform
/// points on [-100, 100] plus 10^3 seeded random points, sorted.
const std::vector<double>& hypothesis_sample_grid();

struct SignSplit {
  Nonlinearity plus;   // max(g, 0)
  Nonlinearity minus;  // max(-g, 0)
};

SignSplit sign_parts(const Nonlinearity& g);

/// t -> integral of an integrand from `base` to t. Values at knots of a
/// geometric grid in the offset t - base are cached; a query integrates the
/// remaining piece from the nearest knot. Safe for concurrent use.
class CumulativeIntegral {
 public:
  CumulativeIntegral(std::function<double(double)> integrand, double base,
                     bool nonnegative = true);

  double base() const { return base_; }
  double operator()(double t) const { return at_offset(t - base_); }
  /// Integral over [base, base + s].
  double at_offset(double s) const;

 private:
  struct Knots;
  std::function<double(double)> integrand_;
  double base_;
  bool nonnegative_;
  std::shared_ptr<Knots> up_, down_;
};

CumulativeIntegral antiderivative(const Nonlinearity& n, double a);

/// Weight h = (g^-/f)^(2/q) f that turns a negative gradient term into an
/// exponential damping of the cumulative integral of f.
class WeightH {
 public:
  WeightH(Nonlinearity f, Nonlinearity g, double q);
  double operator()(double t) const;
  double q() const { return q_; }

 private:
  Nonlinearity f_;
  SignSplit g_;
  double q_;
};

WeightH weight_h(const Nonlinearity& f, const Nonlinearity& g, double q);

/// psi(t) = integral_base^t exp(-2 int_s^t rate) source(s) ds, i.e. the
/// solution of psi' + 2 rate psi = source with psi(base) = 0. A negative rate
/// turns the damping into amplification.
///
/// Integrated with adaptive Radau IIA collocation (5 stages, L-stable), so
/// large rates relax psi to f / (2 rate) without limiting the step. Cached knots as in CumulativeIntegral.
class RelaxedIntegral {
 public:
  RelaxedIntegral(std::function<double(double)> source,
                  std::function<double(double)> rate, double base);

  double base() const { return base_; }
  double operator()(double t) const { return at_offset(t - base_); }
  double at_offset(double s) const;

 private:
  struct Knots;
  std::function<double(double)> source_, rate_;
  double base_;
  std::shared_ptr<Knots> knots_;
};

/// psi_a(t) for the weight h; t >= a.
double weighted_cumulative(const Nonlinearity& f, const WeightH& h, double a,
                           double t);

}  // namespace osserman
