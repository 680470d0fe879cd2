#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "osserman/nonlin.hpp"

namespace osserman {

struct Tolerances {
  double step_rel = 1e-9;
  double phi_cap = 1e12;
  double r_max = 1e3;
};

/// One radial Cauchy problem
///   phi'' + (c-1) phi'/r = f(phi) + g(phi) |phi'|^q,  phi(0) = a, phi'(0) = 0.
struct ProblemSpec {
  Nonlinearity f;
  Nonlinearity g;
  double q = 1.0;
  double c = 1.0;
  double a = 0.0;
  Tolerances tol{};

  /// Throws Error(hypothesis_violation) unless q in (0,2], c >= 1, f is
  /// positive and nondecreasing and g is nondecreasing.
  void validate() const;
  /// phi'' from the equation at (r, phi, phi'); at r = 0 the limit f(a)/c.
  double second_derivative(double r, double phi, double dphi) const;
  double residual(double r, double phi, double dphi, double ddphi) const;
};

struct RadialState {
  double r = 0.0;
  double u = 0.0;  // phi - a
  double dphi = 0.0;
};

struct Sample {
  double r = 0.0;
  double u = 0.0;  // phi - a
  double dphi = 0.0;
  double ddphi = 0.0;
};

/// Accepted solver steps with a quintic Hermite interpolant built from
/// (phi, phi', phi'') at consecutive knots.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double a, std::vector<Sample> samples);

  double a() const { return a_; }
  const std::vector<Sample>& samples() const { return samples_; }
  double r_begin() const { return samples_.front().r; }
  double r_end() const { return samples_.back().r; }
  double phi(const Sample& s) const { return a_ + s.u; }

  /// Interpolated (r, u, phi', phi'') at r in [r_begin, r_end]; throws
  /// Error(out_of_range) outside.
  Sample at(double r) const;
  /// Radius where phi - a equals u, by bisection on the interpolant.
  double radius_at_offset(double u) const;

 private:
  double a_ = 0.0;
  std::vector<Sample> samples_;
};

struct BlowupBracket {
  double low = 0.0;
  double high = 0.0;  // +inf when the tail could not be certified
  std::string method;
  std::string diagnostic;

  bool certified() const;
};

struct SolveOutcome {
  enum class Status { global, blowup };
  Status status = Status::global;
  std::optional<BlowupBracket> bracket;
  Trajectory trajectory;
  std::string stop_reason;

  /// Blow-up with a finite certified radius bracket.
  bool certified_blowup() const {
    return status == Status::blowup && bracket && bracket->certified();
  }
};

const char* to_string(SolveOutcome::Status s);

/// Second-order start at r = h0 (default 1e-6 max(1, |a|)).
RadialState taylor_start(const ProblemSpec& spec,
                         std::optional<double> h0 = std::nullopt);

/// Dormand-Prince 5(4) with PI step control in (phi - a, phi').
/// Stops at r_max (global), at phi >= phi_cap (blow-up), or when the step
/// collapses against a finite certified tail (blow-up). Throws
/// Error(step_underflow) on a collapse without such a certificate and
/// Error(hypothesis_violation) if phi' stops being positive and nondecreasing.
SolveOutcome solve_radial(const ProblemSpec& spec);

/// low = state.r - margin; high = state.r + tail + margin, where the tail is
/// the integral from phi to infinity of 1 / (best lower gradient bound), or,
/// when q > 1 and g(phi) > 0, the smaller closed-form tail that the gradient
/// term alone forces from the state.
BlowupBracket blowup_bracket(const ProblemSpec& spec, const RadialState& state,
                             double solver_margin = 0.0);

struct CheckViolation {
  std::string inequality;
  double r = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double relative = 0.0;  // (violation) / (1 + |value|)
};

struct CheckReport {
  std::vector<std::string> checked;  // inequalities that applied
  std::vector<CheckViolation> violations;
  double worst_relative = 0.0;  // largest relative violation seen (<= 0: none)
  std::size_t samples = 0;

  bool passed() const { return violations.empty(); }
  std::string summary() const;
};

/// Monotonicity, convexity, the gradient cap where g < 0 and r phi'' >= phi'
/// when g >= 0, at every sample, slack 1e-6 (1 + |value|).
CheckReport structural_check(const SolveOutcome& outcome,
                             const ProblemSpec& spec, double slack = 1e-6);

/// The value-space and radius-space gradient bounds at every sample.
CheckReport sandwich_check(const SolveOutcome& outcome, const ProblemSpec& spec,
                           double slack = 1e-6);

/// Columns r, phi, dphi, ddphi, residual; 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& t,
                          const ProblemSpec& spec);

}  // namespace osserman
