#include "osserman/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "osserman/error.hpp"
#include "osserman/quad.hpp"

namespace osserman {

namespace {

bool decide_nonpositive(const Nonlinearity& g) {
  // g is nondecreasing, so g <= 0 everywhere iff its limit is <= 0.
  if (auto L = g.limit_at_infinity()) return *L <= 0.0;
  return g.expr().shape().hi <= 0.0;
}

}  // namespace

BoundFamily::BoundFamily(const Nonlinearity& f, const Nonlinearity& g, double q,
                         double c, double a)
    : f_(f),
      g_(g),
      split_(sign_parts(g)),
      q_(q),
      c_(c),
      a_(a),
      g_at_a_nonneg_(g(a) >= 0.0),
      g_nonpos_(decide_nonpositive(g)),
      h_vanishes_(g_at_a_nonneg_),
      gplus_vanishes_(g_nonpos_),
      F_([f](double t) { return f(t); }, a, true),
      Gp_([gp = split_.plus](double t) { return gp(t); }, a, true),
      Gm_([gm = split_.minus](double t) { return gm(t); }, a, true),
      psi_h_([f](double t) { return f(t); },
             [h = WeightH(f, g, q)](double t) { return h(t); }, a),
      psi_up_([f](double t) { return f(t); },
              [gp = split_.plus](double t) { return -gp(t); }, a),
      psi_lo_([f](double t) { return f(t); },
              [gp = split_.plus, c](double t) { return -gp(t) / c; }, a) {
  if (!(q > 0.0 && q <= 2.0))
    throw Error(ErrorKind::hypothesis_violation, "q must lie in (0,2]");
  if (!(c >= 1.0))
    throw Error(ErrorKind::hypothesis_violation, "c must be >= 1");
}

double BoundFamily::upper_plus(double s) const {
  if (q_ < 2.0) {
    const double e = 1.0 / (2.0 - q_);
    return std::pow(2.0, 2.0 * e) *
           (std::sqrt(F(s)) + std::pow(G_plus(s), e));
  }
  return std::sqrt(2.0 * (gplus_vanishes_ ? F(s) : psi_up_.at_offset(s)));
}

double BoundFamily::lower_plus(double s) const {
  if (q_ < 2.0) {
    const double e = 1.0 / (2.0 - q_);
    return 0.5 * std::pow((2.0 - q_) / c_, e) *
           (std::sqrt(F(s)) + std::pow(G_plus(s), e));
  }
  return std::sqrt(2.0 / c_ *
                   (gplus_vanishes_ ? F(s) : psi_lo_.at_offset(s)));
}

double BoundFamily::lower_minus(double s) const {
  return std::sqrt(q_ * std::pow(c_, -2.0 / q_) * psi_h(s));
}

double BoundFamily::upper_minus(double s) const {
  return std::sqrt(2.0 * psi_h(s));
}

double BoundFamily::best_lower(double s) const {
  double v = lower_minus(s);
  if (g_at_a_nonneg_) v = std::max(v, lower_plus(s));
  return v;
}

std::vector<double> reciprocal_integrals_impl(
    const std::function<double(double)>& bound,
    const std::vector<double>& offsets) {
  std::vector<double> out;
  out.reserve(offsets.size());
  QuadOptions opt;
  // The bounds carry ~1e-10 relative quadrature noise from the inner
  // integrals; asking for more only burns panels on that noise.
  opt.rel_tol = 1e-9;
  opt.abs_tol = 0.0;
  opt.max_panels = 400;
  // A bound whose constant underflows to 0 (q close to 2) makes the
  // reciprocal integral +inf from that piece on.
  bool vanished = false;
  auto integrand = [&bound, &vanished](double s) {
    const double b = bound(s);
    if (b == std::numeric_limits<double>::infinity()) return 0.0;
    if (b == 0.0 && s > 0.0) {
      vanished = true;
      return 0.0;
    }
    return 1.0 / b;
  };
  double prev = 0.0, acc = 0.0;
  for (double s : offsets) {
    if (!(s >= prev))
      throw Error(ErrorKind::out_of_range,
                  "reciprocal_integrals needs increasing offsets");
    if (s > prev) {
      if (prev == 0.0) {
        acc += integrate_finite({integrand, Singularity::inverse_sqrt}, 0.0, s,
                                opt)
                   .value;
      } else {
        acc += integrate_finite({integrand, Singularity::none}, prev, s, opt)
                   .value;
      }
    }
    if (vanished) acc = std::numeric_limits<double>::infinity();
    out.push_back(acc);
    prev = s;
  }
  return out;
}

}  // namespace osserman
