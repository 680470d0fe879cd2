#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "osserman/nonlin.hpp"

namespace osserman {

/// The a priori gradient bounds for the radial problem with data (f, g, q, c)
/// started at phi(0) = a. Every function takes the offset s = phi - a >= 0
/// so that values near the start keep full relative precision.
///
/// Value-space bounds on phi' at phi = a + s:
///   upper_plus   always               (q < 2 and q = 2 forms)
///   lower_plus   only when g(a) >= 0
///   lower_minus  always
///   upper_minus  only when g <= 0 everywhere
/// Radius-space bounds are integrals of the reciprocals over [0, s].
class BoundFamily {
 public:
  BoundFamily(const Nonlinearity& f, const Nonlinearity& g, double q, double c,
              double a);

  double a() const { return a_; }
  double q() const { return q_; }
  double c() const { return c_; }
  bool g_nonnegative_at_a() const { return g_at_a_nonneg_; }
  bool g_nonpositive_everywhere() const { return g_nonpos_; }

  double F(double s) const { return F_.at_offset(s); }
  double G_plus(double s) const { return Gp_.at_offset(s); }
  double G_minus(double s) const { return Gm_.at_offset(s); }
  /// Weighted cumulative integral of f with rate h = (g^-/f)^(2/q) f.
  double psi_h(double s) const {
    return h_vanishes_ ? F(s) : psi_h_.at_offset(s);
  }

  double upper_plus(double s) const;
  double lower_plus(double s) const;
  double lower_minus(double s) const;
  double upper_minus(double s) const;

  /// Best lower gradient bound available: max of lower_minus and, when it
  /// applies, lower_plus.
  double best_lower(double s) const;

  const Nonlinearity& f() const { return f_; }
  const Nonlinearity& g() const { return g_; }
  const SignSplit& split() const { return split_; }

 private:
  Nonlinearity f_, g_;
  SignSplit split_;
  double q_, c_, a_;
  bool g_at_a_nonneg_, g_nonpos_;
  // g >= 0 on [a, inf) kills the weight h; g <= 0 kills g^+. Either turns the
  // weighted integrals into the plain antiderivative of f.
  bool h_vanishes_, gplus_vanishes_;
  CumulativeIntegral F_, Gp_, Gm_;
  RelaxedIntegral psi_h_;
  // q = 2 forms: amplification by g^+ (rate -g^+ and -g^+/c).
  RelaxedIntegral psi_up_, psi_lo_;
};

/// Integral of 1 / bound(s) over [0, s_k] for an increasing list of offsets,
/// accumulated piece by piece. The first piece carries the (s)^(-1/2)
/// singularity of every bound at the start. A bound that vanishes at a
/// positive offset (its constant underflowed) gives +inf from there on.
template <typename Bound>
std::vector<double> reciprocal_integrals(const Bound& bound,
                                         const std::vector<double>& offsets);

std::vector<double> reciprocal_integrals_impl(
    const std::function<double(double)>& bound,
    const std::vector<double>& offsets);

template <typename Bound>
std::vector<double> reciprocal_integrals(const Bound& bound,
                                         const std::vector<double>& offsets) {
  return reciprocal_integrals_impl(std::function<double(double)>(bound),
                                   offsets);
}

}  // namespace osserman
