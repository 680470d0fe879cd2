#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace osserman {

enum class Singularity { none, inverse_sqrt };

/// A nonnegative integrand. With `left = inverse_sqrt` the integrand may
/// behave like (t - a)^(-1/2) at the left end of every integration range it is
/// handed; the first cell is then integrated after substituting t = a + s^2.
///
/// Callers integrating from a large base point should pass the integrand in
/// offset coordinates (t measured from the base) so the singular end sits at
/// 0 with full relative precision.
struct IntegrandSpec {
  std::function<double(double)> fn;
  Singularity left = Singularity::none;
};

struct Estimate {
  double value = 0.0;
  double abs_err = 0.0;
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  int max_panels = 4000;
};

/// Globally adaptive Gauss-Kronrod (7,15) quadrature on [a, b].
/// Throws Error(non_finite) if the integrand is not finite at a node.
Estimate integrate_finite(const IntegrandSpec& spec, double a, double b,
                          const QuadOptions& options = {});

/// Asymptotic class of a positive function as t -> +inf.
///   power_log:  ~ t^power * (ln t)^log_power
///   exp_growth: eventually above every power of t
///   exp_decay:  eventually below every power of t
struct Asymptote {
  enum class Kind { power_log, exp_growth, exp_decay };
  Kind kind = Kind::power_log;
  double power = 0.0;
  double log_power = 0.0;

  static Asymptote constant() { return {}; }
  static Asymptote power_law(double p, double log_p = 0.0) {
    return {Kind::power_log, p, log_p};
  }
  static Asymptote growth() { return {Kind::exp_growth, 0.0, 0.0}; }
  static Asymptote decay() { return {Kind::exp_decay, 0.0, 0.0}; }

  /// Divergence of the integral of this function over [T, inf).
  bool integral_diverges() const;
  std::string to_string() const;
};

std::optional<Asymptote> times(const Asymptote& x, const Asymptote& y);
Asymptote raise(const Asymptote& x, double exponent);
/// Asymptote of x + y (both positive): the dominant term.
Asymptote plus(const Asymptote& x, const Asymptote& y);

struct ProbeResult {
  enum class Verdict { convergent, divergent, inconclusive };
  Verdict verdict = Verdict::inconclusive;
  double value = 0.0;    // meaningful only when convergent
  double abs_err = 0.0;
  std::vector<double> partials;  // I(T_k) on the doubling horizons
  std::string diagnostic;

  bool convergent() const { return verdict == Verdict::convergent; }
  bool divergent() const { return verdict == Verdict::divergent; }
  bool conclusive() const { return verdict != Verdict::inconclusive; }
};

const char* to_string(ProbeResult::Verdict v);

struct ProbeOptions {
  int max_doublings = 40;
  double delta = 1.0;
  double tolerance = 1e-8;
  /// Stop as soon as the verdict is settled instead of running all doublings.
  bool early_exit = true;
  /// When the integral is known to converge, growing increments are read as
  /// a transient and never as divergence.
  bool allow_divergent = true;
};

/// Improper integral of a nonnegative, eventually monotone integrand over
/// [a, inf), estimated from the partial integrals I(T_k), T_k = a + 2^k delta.
ProbeResult integrate_to_infinity(const IntegrandSpec& spec, double a,
                                  const ProbeOptions& options = {});

/// Divergence verdict for the integral over [a, inf). When an asymptotic hint
/// for the integrand is supplied the symbolic rule decides and the numeric
/// probe serves as a cross-check; a conclusive numeric disagreement throws
/// Error(conflicting_evidence).
ProbeResult divergence_probe(const IntegrandSpec& spec, double a,
                             const std::optional<Asymptote>& hint,
                             const ProbeOptions& options = {});

}  // namespace osserman
