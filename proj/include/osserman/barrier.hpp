#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osserman/classify.hpp"
#include "osserman/nonlin.hpp"

namespace osserman {

/// Data of the universal barrier: f, g, q, the dimension n (playing the role
/// of c in the radial problem) and the regime of g at infinity.
struct BarrierProblem {
  BarrierProblem(Nonlinearity f, Nonlinearity g, double q, int n,
                 Regime regime);

  Nonlinearity f, g;
  double q;
  int n;
  Regime regime;
  /// Empty when f -> +inf is granted (or not needed); otherwise why the
  /// growth hypothesis on f could not be confirmed.
  std::string buf_note;
  /// Nonempty when f is only nondecreasing: R is still defined, but the
  /// pointwise bound relies on strict increase.
  std::string strict_note;
  /// The regime's existence condition, evaluated once. R is finite exactly
  /// when it fails; null when the evaluation raised an error.
  std::shared_ptr<const ConditionReport> condition;
};

struct BarrierValue {
  double value = 0.0;  // +inf when the defining integral diverges
  double abs_err = 0.0;
  std::string diagnostic;
};

/// R(a) by the regime's formula:
///   positive, q < 2: 2 (n/(2-q))^(1/(2-q)) int dt / [F^(1/2) + G+^(1/(2-q))]
///   positive, q = 2: sqrt(n/2) int dt / psi^(1/2), psi' = f + (2/n) g+ psi
///   zero:            n^(1/q)/sqrt(q) int dt / psi_h^(1/2)
///   negative:        2 n^(1/q)/q int [F^(-1/2) + (G-/F)^(1/q)] dt
/// with F, G+-, psi cumulative from a. A conclusive existence condition
/// decides between +inf and a finite value; otherwise the numeric probe
/// does. Throws Error(inconclusive) when the improper integral can be neither
/// certified finite nor divergent.
BarrierValue barrier_estimate(const BarrierProblem& p, double a,
                              double rel_tol = 1e-9);
double barrier_value(const Nonlinearity& f, const Nonlinearity& g, double q,
                     int n, const Regime& regime, double a);

/// Monotone table of R on a grid. Immutable once built; inversion evaluates
/// extra points on demand without touching the table.
class BarrierTable {
 public:
  const BarrierProblem& problem() const { return *problem_; }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& errors() const { return errors_; }
  bool infinite() const { return infinite_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  friend BarrierTable tabulate(const BarrierProblem&, double, double, int,
                               int);
  std::shared_ptr<const BarrierProblem> problem_;
  std::vector<double> a_, values_, errors_;
  bool infinite_ = false;
  std::vector<std::string> diagnostics_;
};

/// Grid a_i = a_lo - 1 + (a_hi - a_lo + 1)^(i/(points-1)), geometric in the
/// offset from a_lo - 1. Throws Error(monotonicity_violation) when two
/// entries are out of order beyond their error bounds or the table mixes
/// finite and infinite entries.
BarrierTable tabulate(const BarrierProblem& p, double a_lo, double a_hi,
                      int points, int threads = 1);

/// Floor of the leftward search in invert.
inline constexpr double kInvertFloor = -1e6;

/// a with R(a) = b (to 1e-8 in b), or -inf when R stays below b down to the
/// floor, and for every b when the table is infinite. Returns +inf only when
/// R stays above b up to a = 1e6.
double invert(const BarrierTable& table, double b);

/// a* found by doubling from 1 with R(a*) <= target.
std::optional<double> vanishing_point(const BarrierProblem& p,
                                      double target = 1e-2);

class DomainShape {
 public:
  enum class Kind { ball, box, half_space };

  static DomainShape ball(std::vector<double> center, double radius);
  static DomainShape box(std::vector<double> lo, std::vector<double> hi);
  /// {x : <normal, x> >= offset}.
  static DomainShape half_space(std::vector<double> normal, double offset);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return p_.size(); }
  const std::vector<double>& p() const { return p_; }
  const std::vector<double>& q() const { return q_; }
  double scalar() const { return s_; }
  std::string to_string() const;

 private:
  Kind kind_ = Kind::ball;
  std::vector<double> p_, q_;  // center / lo / normal, and hi for boxes
  double s_ = 0.0;             // radius / offset
};

/// Euclidean distance to the boundary; Error(outside_domain) for points
/// outside the closed domain.
double distance(const DomainShape& shape, const std::vector<double>& x);

/// inf{t : g(t) >= 0} for nondecreasing g, by bisection; -inf when g >= 0
/// down to the inversion floor.
double threshold_t0(const Nonlinearity& g);

/// max{t0, R^{-1}(d(x))} in the positive regime, R^{-1}(d(x)) otherwise;
/// +inf when the table is infinite or x lies on the boundary.
double upper_bound(const BarrierTable& table, const DomainShape& shape,
                   double t0, const std::vector<double>& x);

struct FieldSample {
  std::vector<double> x;
  double u = 0.0;
};

struct BoundViolation {
  std::vector<double> x;
  double u = 0.0;
  double bound = 0.0;
};

struct BoundReport {
  std::size_t checked = 0;
  double worst_margin = 0.0;  // min over samples of bound - u
  std::vector<BoundViolation> violations;
  bool passed() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks u(x) <= upper_bound(x) + 1e-8 at every sample.
BoundReport compare_with_radial(const std::vector<FieldSample>& u,
                                const BarrierTable& table,
                                const DomainShape& shape, double t0);
BoundReport compare_with_radial(
    const std::function<double(const std::vector<double>&)>& u,
    const std::vector<std::vector<double>>& points, const BarrierTable& table,
    const DomainShape& shape, double t0);

void write_table_csv(std::ostream& os, const BarrierTable& table);
/// Rows x..., d, bound for each point.
void write_bound_csv(std::ostream& os, const BarrierTable& table,
                     const DomainShape& shape, double t0,
                     const std::vector<std::vector<double>>& points);

}  // namespace osserman
