#include "osserman/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/numeric/odeint/stepper/rosenbrock4.hpp>  // coefficients only

#include "osserman/bounds.hpp"
#include "osserman/error.hpp"
#include "osserman/quad.hpp"

namespace osserman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using Vec = std::array<double, 2>;  // (u, phi')

struct Run {
  std::vector<Sample> samples;
  std::string reason;  // "r_max", "phi_cap" or "step_collapse"
};

bool finite(const Vec& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }

// One Dormand-Prince step of size h from (x, y) with first stage k1.
// Returns the fifth-order solution, its last stage (FSAL) and the scaled
// error norm (pure relative, NaN when a stage is not finite).
template <typename Rhs>
double dp_step(const Rhs& rhs, double x, const Vec& y, const Vec& k1, double h,
               double x_new, double rtol, Vec& y7, Vec& k7) {
  Vec y2, y3, y4, y5, y6, k2, k3, k4, k5, k6;
  for (int i = 0; i < 2; ++i) y2[i] = y[i] + h * a21 * k1[i];
  k2 = rhs(x + c2 * h, y2);
  for (int i = 0; i < 2; ++i) y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = rhs(x + c3 * h, y3);
  for (int i = 0; i < 2; ++i)
    y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = rhs(x + c4 * h, y4);
  for (int i = 0; i < 2; ++i)
    y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = rhs(x + c5 * h, y5);
  for (int i = 0; i < 2; ++i)
    y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                        a64 * k4[i] + a65 * k5[i]);
  k6 = rhs(x + h, y6);
  for (int i = 0; i < 2; ++i)
    y7[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                        b6 * k6[i]);
  k7 = rhs(x_new, y7);
  if (!finite(y7) || !finite(k7)) return std::nan("");
  double m = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);
    const double sc = rtol * std::max(std::abs(y[i]), std::abs(y7[i])) + 1e-300;
    m = std::max(m, std::abs(e) / sc);
  }
  return m;
}

struct Controller {
  double err_prev = 1e-4;
  // Factor for the next step after an accepted one (PI control).
  double accept(double err) {
    const double e_use = std::max(err, 1e-10);
    const double fac =
        0.9 * std::pow(e_use, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
    err_prev = std::max(err, 1e-4);
    return std::clamp(fac, 0.2, 5.0);
  }
  static double reject(double err) {
    return std::clamp(0.9 * std::pow(err, -1.0 / 5.0), 0.2, 1.0);
  }
};

using Mat = std::array<Vec, 2>;

// Solves M x = b for a 2x2 matrix by Cramer's rule.
Vec solve2(const Mat& M, const Vec& b) {
  const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
  return {(b[0] * M[1][1] - M[0][1] * b[1]) / det,
          (M[0][0] * b[1] - b[0] * M[1][0]) / det};
}

// One step of the 4(3) Rosenbrock method whose coefficients odeint ships
// (the RODAS4 set). The odeint stepper itself is not used: it is built on
// ublas, which does not compile as C++20 in this Boost. Its d4 also carries
// the wrong sign (+0.0362 instead of -0.0362), which drops the method to
// first order on non-autonomous systems; the corrected value is used here.
template <typename Deriv, typename Jacobi>
void rosenbrock_step(const Deriv& deriv, const Jacobi& jacobi, double x,
                     const Vec& y, double h, Vec& y_out, Vec& y_err) {
  static const boost::numeric::odeint::default_rosenbrock_coefficients<double>
      C;
  constexpr double kD4 = -0.3620000000000023e-01;
  const Vec f0 = deriv(x, y);
  Mat J;
  Vec dfdx;
  jacobi(x, y, J, dfdx);
  Mat M;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      M[i][j] = (i == j ? 1.0 / (C.gamma * h) : 0.0) - J[i][j];
  Vec g1, g2, g3, g4, g5, t, fx;
  for (int i = 0; i < 2; ++i) t[i] = f0[i] + h * C.d1 * dfdx[i];
  g1 = solve2(M, t);
  for (int i = 0; i < 2; ++i) t[i] = y[i] + C.a21 * g1[i];
  fx = deriv(x + C.c2 * h, t);
  for (int i = 0; i < 2; ++i)
    t[i] = fx[i] + h * C.d2 * dfdx[i] + C.c21 * g1[i] / h;
  g2 = solve2(M, t);
  for (int i = 0; i < 2; ++i) t[i] = y[i] + C.a31 * g1[i] + C.a32 * g2[i];
  fx = deriv(x + C.c3 * h, t);
  for (int i = 0; i < 2; ++i)
    t[i] = fx[i] + h * C.d3 * dfdx[i] + (C.c31 * g1[i] + C.c32 * g2[i]) / h;
  g3 = solve2(M, t);
  for (int i = 0; i < 2; ++i)
    t[i] = y[i] + C.a41 * g1[i] + C.a42 * g2[i] + C.a43 * g3[i];
  fx = deriv(x + C.c4 * h, t);
  for (int i = 0; i < 2; ++i)
    t[i] = fx[i] + h * kD4 * dfdx[i] +
           (C.c41 * g1[i] + C.c42 * g2[i] + C.c43 * g3[i]) / h;
  g4 = solve2(M, t);
  Vec x5;
  for (int i = 0; i < 2; ++i)
    x5[i] = y[i] + C.a51 * g1[i] + C.a52 * g2[i] + C.a53 * g3[i] +
            C.a54 * g4[i];
  fx = deriv(x + h, x5);
  for (int i = 0; i < 2; ++i)
    t[i] = fx[i] +
           (C.c51 * g1[i] + C.c52 * g2[i] + C.c53 * g3[i] + C.c54 * g4[i]) / h;
  g5 = solve2(M, t);
  for (int i = 0; i < 2; ++i) x5[i] += g5[i];
  fx = deriv(x + h, x5);
  for (int i = 0; i < 2; ++i)
    t[i] = fx[i] + (C.c61 * g1[i] + C.c62 * g2[i] + C.c63 * g3[i] +
                    C.c64 * g4[i] + C.c65 * g5[i]) /
                       h;
  y_err = solve2(M, t);
  for (int i = 0; i < 2; ++i) y_out[i] = x5[i] + y_err[i];
}

// Once phi' >= 1 the solver switches to phi as the independent variable,
// integrating (r, phi') in phi:
//   dr/dphi = 1/phi',  dphi'/dphi = phi''/phi'.
// With g < 0 and q = 2 the gradient relaxes to sqrt(f / g^-) at rate
// ~ 2 sqrt(f) in r, which pins an explicit r-step to the stability limit; in
// phi the same mode has rate ~ 2 g^-. Blow-up also becomes a finite phi-range.
constexpr double kSwitchGradient = 1.0;

void check_gradient(double r_new, double p_old, double p_new) {
  // Sanity: phi' stays positive and nondecreasing.
  if (!(p_new > 0.0) || p_new < p_old - 1e-6 * (1.0 + std::abs(p_old)))
    throw Error(ErrorKind::hypothesis_violation,
                "phi' lost positivity or monotonicity at r = " + fmt(r_new) +
                    " (phi' " + fmt(p_old) + " -> " + fmt(p_new) + ")");
}

Run integrate(const ProblemSpec& spec, double rtol) {
  const double a = spec.a;
  Run run;
  const RadialState start = taylor_start(spec);
  run.samples.push_back({0.0, 0.0, 0.0, spec.f(a) / spec.c});
  const double r_max = spec.tol.r_max;
  const double cap = spec.tol.phi_cap - a;
  // Explicit method: give up instead of crawling if something still pins the
  // step (no stiff integrator here).
  constexpr long kMaxSteps = 1000000;
  long steps = 0;
  auto budget = [&](double r, double h) {
    if (++steps > kMaxSteps)
      throw Error(ErrorKind::step_underflow,
                  "radial solver exceeded the step budget at r = " + fmt(r) +
                      " (step " + fmt(h) + ")");
  };

  // Phase 1: radius as the variable, state (u, phi').
  auto rhs_r = [&](double r, const Vec& y) -> Vec {
    return {y[1], spec.second_derivative(r, a + y[0], y[1])};
  };
  double r = start.r;
  Vec y{start.u, start.dphi};
  Vec k1 = rhs_r(r, y);
  run.samples.push_back({r, y[0], y[1], k1[1]});
  double h = start.r;
  Controller ctl;
  for (;;) {
    budget(r, h);
    if (r >= r_max) {
      run.reason = "r_max";
      return run;
    }
    if (y[0] >= cap) {
      run.reason = "phi_cap";
      return run;
    }
    if (y[1] >= kSwitchGradient) break;
    if (h < 16.0 * kEps * r) {
      run.reason = "step_collapse";
      return run;
    }
    bool last = false;
    if (r + h >= r_max) {
      h = r_max - r;
      last = true;
    }
    const double r_new = last ? r_max : r + h;
    Vec y7, k7;
    const double err = dp_step(rhs_r, r, y, k1, h, r_new, rtol, y7, k7);
    if (!std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err > 1.0) {
      h *= Controller::reject(err);
      continue;
    }
    check_gradient(r_new, y[1], y7[1]);
    r = r_new;
    y = y7;
    k1 = k7;
    run.samples.push_back({r, y[0], y[1], k1[1]});
    const double fac = ctl.accept(err);
    if (!last) h *= fac;
  }

  // Phase 2: phi as the variable (offset u), state (r, phi'). The
  // relaxation mode stays stiff relative to the growth of the solution
  // (rate ~ 2 g^- in phi against a scale ~ phi), so this phase uses an
  // L-stable Rosenbrock method. The Jacobian in (r, phi') is analytic:
  //   G = f/p + g p^(q-1) - (c-1)/r,  dG/dr = (c-1)/r^2,
  //   dG/dp = -f/p^2 + (q-1) g p^(q-2);
  // only dG/du needs a difference quotient.
  const double q = spec.q, cm1 = spec.c - 1.0;
  auto G = [&](double u, double rr, double p) {
    const double phi = a + u;
    const double gv = spec.g(phi);
    const double grad = gv == 0.0 ? 0.0 : gv * std::pow(p, q - 1.0);
    return spec.f(phi) / p + grad - cm1 / rr;
  };
  auto deriv = [&](double u, const Vec& z) -> Vec {
    return {1.0 / z[1], G(u, z[0], z[1])};
  };
  auto jacobi = [&](double u, const Vec& z, Mat& J, Vec& dfdu) {
    const double phi = a + u, rr = z[0], p = z[1];
    const double gv = spec.g(phi);
    J = {{{0.0, -1.0 / (p * p)},
          {cm1 / (rr * rr),
           -spec.f(phi) / (p * p) +
               (gv == 0.0 ? 0.0 : (q - 1.0) * gv * std::pow(p, q - 2.0))}}};
    const double d = 1e-6 * std::max(1.0, std::abs(phi));
    dfdu = {0.0, (G(u + d, rr, p) - G(u - d, rr, p)) / (2.0 * d)};
  };

  double u = y[0];
  Vec z{r, y[1]}, z_new, z_err, dz;
  h = std::max(h * z[1], 16.0 * kEps * (std::abs(a) + u));
  ctl = Controller{};
  for (;;) {
    budget(z[0], h);
    if (z[0] >= r_max) {
      run.reason = "r_max";
      return run;
    }
    if (u >= cap) {
      run.reason = "phi_cap";
      return run;
    }
    if (h < 16.0 * kEps * (std::abs(a) + u)) {
      run.reason = "step_collapse";
      return run;
    }
    const double u_new = u + h;
    rosenbrock_step(deriv, jacobi, u, z, h, z_new, z_err);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc =
          rtol * std::max(std::abs(z[i]), std::abs(z_new[i])) + 1e-300;
      err = std::max(err, std::abs(z_err[i]) / sc);
    }
    if (!std::isfinite(err) || !std::isfinite(z_new[0]) ||
        !std::isfinite(z_new[1]) || !(z_new[1] > 0.0)) {
      h *= 0.25;
      continue;
    }
    if (err > 1.0) {
      h *= std::clamp(0.9 * std::pow(err, -0.25), 0.2, 1.0);
      continue;
    }
    if (!(z_new[0] - z[0] > 4.0 * kEps * z[0])) {
      // The radius no longer resolves the step: r has converged to the end
      // of the existence interval at double precision.
      run.reason = "step_collapse";
      return run;
    }
    bool at_rmax = false;
    if (z_new[0] > r_max) {
      if (z_new[0] - r_max > 1e-13 * r_max) {
        // Land on r_max: secant on the radius increment.
        h *= std::min(0.999, (r_max - z[0]) / (z_new[0] - z[0]));
        continue;
      }
      at_rmax = true;
    }
    dz = deriv(u_new, z_new);
    if (!std::isfinite(dz[1])) {
      h *= 0.25;
      continue;
    }
    check_gradient(z_new[0], z[1], z_new[1]);
    u = u_new;
    z = z_new;
    if (at_rmax) z[0] = r_max;
    run.samples.push_back({z[0], u, z[1], z[1] * dz[1]});
    const double e_use = std::max(err, 1e-10);
    double fac = 0.9 * std::pow(e_use, -0.7 / 4.0) *
                 std::pow(ctl.err_prev, 0.4 / 4.0);
    ctl.err_prev = std::max(err, 1e-4);
    h *= std::clamp(fac, 0.2, 5.0);
  }
}

double offset_tail(const ProblemSpec& spec, double u_end, std::string& why) {
  BoundFamily B(spec.f, spec.g, spec.q, spec.c, spec.a);
  IntegrandSpec tail{[&B, u_end](double s) {
    const double lb = B.best_lower(u_end + s);
    if (lb == kInf) return 0.0;
    return 1.0 / lb;
  }};
  ProbeOptions opt;
  opt.delta = std::max(1.0, u_end);
  ProbeResult p;
  try {
    p = integrate_to_infinity(tail, 0.0, opt);
  } catch (const Error& e) {
    why = std::string("tail probe failed: ") + e.what();
    return kInf;
  }
  why = p.diagnostic;
  if (!p.convergent()) return kInf;
  return p.value + p.abs_err;
}

// Tail from the state alone. Past (r, phi, p) with g(phi) > 0 and q > 1,
// g nondecreasing and r growing give p dp/dphi >= g(phi) p^q - (c-1) p / r,
// so dp/dphi >= g(phi) p^(q-1) / 2 once p^(q-1) >= 2 (c-1) / (r g(phi)), and
// the remaining radius is at most 2 p^(1-q) / (g(phi) (q-1)).
double state_tail(const ProblemSpec& spec, const RadialState& state) {
  const double gc = spec.g(spec.a + state.u);
  const double p = state.dphi * (1.0 - 1e-6);
  if (!(spec.q > 1.0) || !(gc > 0.0) || !(p > 0.0) || !(state.r > 0.0))
    return kInf;
  const double kappa = (spec.c - 1.0) / state.r;
  if (std::pow(p, spec.q - 1.0) < 2.0 * kappa / gc) return kInf;
  return 2.0 * std::pow(p, 1.0 - spec.q) / (gc * (spec.q - 1.0));
}

}  // namespace

const char* to_string(SolveOutcome::Status s) {
  return s == SolveOutcome::Status::global ? "global" : "blowup";
}

void ProblemSpec::validate() const {
  if (!(q > 0.0 && q <= 2.0))
    throw Error(ErrorKind::hypothesis_violation, "q must lie in (0,2]");
  if (!(c >= 1.0))
    throw Error(ErrorKind::hypothesis_violation, "c must be >= 1");
  if (!std::isfinite(a))
    throw Error(ErrorKind::hypothesis_violation, "a must be finite");
  auto rf = verify_hypotheses(f, Profile::ode, Role::f);
  if (!rf.passed())
    throw Error(ErrorKind::hypothesis_violation, "f: " + rf.summary());
  auto rg = verify_hypotheses(g, Profile::ode, Role::g);
  if (!rg.passed())
    throw Error(ErrorKind::hypothesis_violation, "g: " + rg.summary());
  if (!(tol.step_rel > 0.0) || !(tol.r_max > 0.0) || !(tol.phi_cap > a))
    throw Error(ErrorKind::hypothesis_violation,
                "tolerances need step_rel > 0, r_max > 0, phi_cap > a");
}

double ProblemSpec::second_derivative(double r, double phi,
                                      double dphi) const {
  if (r == 0.0) return f(a) / c;
  const double gv = g(phi);
  const double grad = gv == 0.0 ? 0.0 : gv * std::pow(std::abs(dphi), q);
  return f(phi) + grad - (c - 1.0) * dphi / r;
}

double ProblemSpec::residual(double r, double phi, double dphi,
                             double ddphi) const {
  const double gv = g(phi);
  const double grad = gv == 0.0 ? 0.0 : gv * std::pow(std::abs(dphi), q);
  const double drift = r == 0.0 ? (c - 1.0) * ddphi : (c - 1.0) * dphi / r;
  return ddphi + drift - f(phi) - grad;
}

RadialState taylor_start(const ProblemSpec& spec, std::optional<double> h0) {
  const double h = h0 ? *h0 : 1e-6 * std::max(1.0, std::abs(spec.a));
  if (!(h > 0.0))
    throw Error(ErrorKind::out_of_range, "taylor_start needs h0 > 0");
  const double fa = spec.f(spec.a);
  return {h, fa * h * h / (2.0 * spec.c), fa * h / spec.c};
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(double a, std::vector<Sample> samples)
    : a_(a), samples_(std::move(samples)) {
  if (samples_.empty())
    throw Error(ErrorKind::out_of_range, "empty trajectory");
}

Sample Trajectory::at(double r) const {
  if (!(r >= r_begin() && r <= r_end()))
    throw Error(ErrorKind::out_of_range,
                "radius " + fmt(r) + " outside the trajectory range [" +
                    fmt(r_begin()) + ", " + fmt(r_end()) + "]");
  auto it = std::upper_bound(
      samples_.begin(), samples_.end(), r,
      [](double x, const Sample& s) { return x < s.r; });
  if (it == samples_.end()) return samples_.back();
  if (it == samples_.begin()) return samples_.front();
  const Sample& s0 = *(it - 1);
  const Sample& s1 = *it;
  const double h = s1.r - s0.r;
  if (r == s0.r) return s0;
  // Quintic Hermite in theta on (u, u', u'') at both ends.
  const double c0 = s0.u, c1 = h * s0.dphi, c2 = 0.5 * h * h * s0.ddphi;
  const double Y = s1.u - (c0 + c1 + c2);
  const double D = h * s1.dphi - (c1 + 2.0 * c2);
  const double S = h * h * s1.ddphi - 2.0 * c2;
  const double c3 = 10.0 * Y - 4.0 * D + 0.5 * S;
  const double c4 = -15.0 * Y + 7.0 * D - S;
  const double c5 = 6.0 * Y - 3.0 * D + 0.5 * S;
  const double t = (r - s0.r) / h;
  Sample out;
  out.r = r;
  out.u = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
  out.dphi =
      (c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)))) / h;
  out.ddphi =
      (2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5))) / (h * h);
  return out;
}

double Trajectory::radius_at_offset(double u) const {
  if (u <= samples_.front().u) return samples_.front().r;
  if (u >= samples_.back().u) return samples_.back().r;
  auto it = std::lower_bound(
      samples_.begin(), samples_.end(), u,
      [](const Sample& s, double x) { return s.u < x; });
  double lo = (it - 1)->r, hi = it->r;
  for (int i = 0; i < 200 && hi - lo > 4 * kEps * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid).u < u) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

bool BlowupBracket::certified() const { return std::isfinite(high); }

// ---------------------------------------------------------------------------
// Solve and bracket

BlowupBracket blowup_bracket(const ProblemSpec& spec, const RadialState& state,
                             double solver_margin) {
  BlowupBracket b;
  std::string why;
  double tail = offset_tail(spec, state.u, why);
  b.method = "lower-gradient tail";
  const double local = state_tail(spec, state);
  if (local < tail) {
    tail = local;
    b.method = "gradient-term tail from the final state";
  }
  b.low = std::max(0.0, state.r - solver_margin);
  b.high = state.r + tail + solver_margin;
  std::ostringstream os;
  os.precision(17);
  os << "tail " << tail << " from phi = " << spec.a + state.u
     << ", solver margin " << solver_margin << "; " << why;
  b.diagnostic = os.str();
  if (!std::isfinite(tail)) b.high = kInf;
  return b;
}

SolveOutcome solve_radial(const ProblemSpec& spec) {
  spec.validate();
  Run run = integrate(spec, spec.tol.step_rel);
  SolveOutcome out;
  out.stop_reason = run.reason;
  out.trajectory = Trajectory(spec.a, run.samples);
  if (run.reason == "r_max") {
    out.status = SolveOutcome::Status::global;
    return out;
  }

  // Solver error on the radius from a rerun at a much tighter tolerance.
  double margin = 0.0;
  try {
    Run fine = integrate(spec, spec.tol.step_rel / 64.0);
    Trajectory tf(spec.a, fine.samples);
    const double u_star = std::min(run.samples.back().u, fine.samples.back().u);
    margin = 4.0 * std::abs(out.trajectory.radius_at_offset(u_star) -
                            tf.radius_at_offset(u_star));
  } catch (const Error&) {
    margin = kInf;
  }
  const Sample& end = run.samples.back();
  BlowupBracket b =
      blowup_bracket(spec, {end.r, end.u, end.dphi}, std::isfinite(margin) ? margin : 0.0);
  if (!std::isfinite(margin)) {
    b.high = kInf;
    b.diagnostic += "; tighter rerun failed, no solver margin";
  }
  if (run.reason == "step_collapse" && !b.certified())
    throw Error(ErrorKind::step_underflow,
                "step collapsed at r = " + fmt(end.r) + ", phi = " +
                    fmt(spec.a + end.u) + " without a finite tail bound (" +
                    b.diagnostic + ")");
  out.status = SolveOutcome::Status::blowup;
  out.bracket = b;
  return out;
}

// ---------------------------------------------------------------------------
// Checks

std::string CheckReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << (passed() ? "pass" : "FAIL") << ": " << samples << " samples, "
     << checked.size() << " inequalities";
  for (const auto& c : checked) os << " " << c;
  os << "; worst relative violation " << worst_relative;
  for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
    const auto& v = violations[i];
    os.precision(17);
    os << "\n  " << v.inequality << " at r = " << v.r << ": " << v.lhs
       << " vs " << v.rhs << " (relative " << v.relative << ")";
  }
  if (violations.size() > 5)
    os << "\n  ... " << violations.size() - 5 << " more";
  return os.str();
}

namespace {

bool g_nonnegative_on_trajectory(const ProblemSpec& spec) {
  // g nondecreasing and phi >= a along the solution.
  return spec.g(spec.a) >= 0.0;
}

struct Recorder {
  CheckReport& rep;
  double slack;
  bool scaled_by_one;  // slack * (1 + |v|) instead of pure relative

  // Record lhs <= rhs.
  void le(const std::string& name, double r, double lhs, double rhs) {
    if (!std::isfinite(lhs) || !std::isfinite(rhs)) return;
    const double scale = scaled_by_one
                             ? 1.0 + std::max(std::abs(lhs), std::abs(rhs))
                             : std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    const double rel = (lhs - rhs) / scale;
    rep.worst_relative = std::max(rep.worst_relative, rel);
    if (rel > slack) rep.violations.push_back({name, r, lhs, rhs, rel});
  }
};

}  // namespace

CheckReport structural_check(const SolveOutcome& outcome,
                             const ProblemSpec& spec, double slack) {
  CheckReport rep;
  rep.worst_relative = -kInf;
  Recorder rec{rep, slack, true};
  const bool sc = g_nonnegative_on_trajectory(spec) && spec.c >= 1.0;
  rep.checked = {"increasing", "convex", "gradient_cap"};
  if (sc) rep.checked.push_back("r_phi2_ge_phi1");
  const auto& S = outcome.trajectory.samples();
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Sample& s = S[i];
    if (s.r == 0.0) continue;
    ++rep.samples;
    const double phi = spec.a + s.u;
    if (!(s.dphi > 0.0)) rep.violations.push_back({"increasing", s.r, s.dphi, 0.0, 1.0});
    rec.le("convex", s.r, -s.ddphi, 0.0);
    if (i > 0) rec.le("convex", s.r, S[i - 1].dphi, s.dphi);
    const double gv = spec.g(phi);
    if (gv < 0.0) {
      const double cap = std::pow(spec.f(phi) / -gv, 1.0 / spec.q);
      rec.le("gradient_cap", s.r, s.dphi, cap);
    }
    if (sc) rec.le("r_phi2_ge_phi1", s.r, s.dphi, s.r * s.ddphi);
  }
  return rep;
}

CheckReport sandwich_check(const SolveOutcome& outcome, const ProblemSpec& spec,
                           double slack) {
  CheckReport rep;
  rep.worst_relative = -kInf;
  Recorder rec{rep, slack, false};
  BoundFamily B(spec.f, spec.g, spec.q, spec.c, spec.a);
  const bool plus_lower = B.g_nonnegative_at_a();
  const bool minus_upper = B.g_nonpositive_everywhere();
  rep.checked = {"ubg+", "lbg-", "lbrg+", "ubrg-"};
  if (plus_lower) {
    rep.checked.push_back("lbg+");
    rep.checked.push_back("ubrg+");
  }
  if (minus_upper) {
    rep.checked.push_back("ubg-");
    rep.checked.push_back("lbrg-");
  }

  std::vector<const Sample*> pts;
  std::vector<double> offs;
  for (const Sample& s : outcome.trajectory.samples()) {
    if (s.r == 0.0 || !(s.u > 0.0)) continue;
    if (!offs.empty() && !(s.u > offs.back())) continue;
    pts.push_back(&s);
    offs.push_back(s.u);
  }
  rep.samples = pts.size();

  for (const Sample* s : pts) {
    rec.le("ubg+", s->r, s->dphi, B.upper_plus(s->u));
    rec.le("lbg-", s->r, B.lower_minus(s->u), s->dphi);
    if (plus_lower) rec.le("lbg+", s->r, B.lower_plus(s->u), s->dphi);
    if (minus_upper) rec.le("ubg-", s->r, s->dphi, B.upper_minus(s->u));
  }

  auto radius = [&](const char* name, auto bound, bool r_is_upper_bounded) {
    std::vector<double> I = reciprocal_integrals(bound, offs);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (r_is_upper_bounded) rec.le(name, pts[i]->r, pts[i]->r, I[i]);
      else rec.le(name, pts[i]->r, I[i], pts[i]->r);
    }
  };
  radius("lbrg+", [&B](double s) { return B.upper_plus(s); }, false);
  radius("ubrg-", [&B](double s) { return B.lower_minus(s); }, true);
  if (plus_lower)
    radius("ubrg+", [&B](double s) { return B.lower_plus(s); }, true);
  if (minus_upper)
    radius("lbrg-", [&B](double s) { return B.upper_minus(s); }, false);
  return rep;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t,
                          const ProblemSpec& spec) {
  const auto old = os.precision(17);
  os << "r,phi,dphi,ddphi,residual\n";
  for (const Sample& s : t.samples()) {
    const double phi = t.a() + s.u;
    os << s.r << ',' << phi << ',' << s.dphi << ',' << s.ddphi << ','
       << spec.residual(s.r, phi, s.dphi, s.ddphi) << '\n';
  }
  os.precision(old);
}

}  // namespace osserman
