#include "osserman/quad.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "osserman/error.hpp"

namespace osserman {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Panel {
  double lo, hi, value, err;
  bool operator<(const Panel& other) const { return err < other.err; }
};

// One Gauss-Kronrod (7,15) panel from Boost's node tables. The panel rule is
// evaluated here because Boost 1.74 reports the single-panel error estimate
// on the reference interval [-1, 1] without the width scaling.
template <typename F>
Panel panel(const F& f, double lo, double hi) {
  static const auto& kx = Rule::abscissa();
  static const auto& kw = Rule::weights();
  static const auto& gw = boost::math::quadrature::gauss<double, 7>::weights();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f0 = f(mid);
  double kron = kw[0] * f0;
  double gauss = gw[0] * f0;
  for (std::size_t i = 1; i < kx.size(); ++i) {
    const double d = half * kx[i];
    const double s = f(mid - d) + f(mid + d);
    kron += kw[i] * s;
    if (i % 2 == 0) gauss += gw[i / 2] * s;
  }
  kron *= half;
  gauss *= half;
  const double err = std::max(std::abs(kron - gauss),
                              std::abs(kron) * 4.0 * kEps);
  return {lo, hi, kron, err};
}

// Global adaptive bisection on [lo, hi]: always split the panel with the
// largest error estimate.
template <typename F>
Estimate adapt(const F& f, double lo, double hi, const QuadOptions& opt) {
  std::priority_queue<Panel> heap;
  Panel first = panel(f, lo, hi);
  double value = first.value, err = first.err;
  heap.push(first);
  int panels = 1;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) &&
         panels < opt.max_panels) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      heap.push(worst);
      break;
    }
    Panel left = panel(f, worst.lo, mid);
    Panel right = panel(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the cancellation drift of the running totals.
  value = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().err;
    heap.pop();
  }
  return {value, err};
}

bool close_to(double x, double y) { return std::abs(x - y) <= 1e-12; }

}  // namespace

Estimate integrate_finite(const IntegrandSpec& spec, double a, double b,
                          const QuadOptions& options) {
  if (!(a < b)) {
    if (a == b) return {};
    throw Error(ErrorKind::out_of_range, "integrate_finite needs a < b");
  }
  auto checked = [&spec](double t) {
    const double v = spec.fn(t);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os.precision(17);
      os << "integrand is not finite at t = " << t << " (value " << v << ")";
      throw Error(ErrorKind::non_finite, os.str());
    }
    return v;
  };
  if (spec.left == Singularity::none) return adapt(checked, a, b, options);

  // t = a + s^2 on the first cell removes the (t - a)^(-1/2) blow-up.
  const double width = std::min(b - a, 1.0);
  auto substituted = [&](double s) {
    if (s == 0.0) return 0.0;
    return 2.0 * s * checked(a + s * s);
  };
  Estimate head = adapt(substituted, 0.0, std::sqrt(width), options);
  if (a + width >= b) return head;
  Estimate rest = adapt(checked, a + width, b, options);
  return {head.value + rest.value, head.abs_err + rest.abs_err};
}

bool Asymptote::integral_diverges() const {
  switch (kind) {
    case Kind::exp_growth: return true;
    case Kind::exp_decay: return false;
    case Kind::power_log:
      if (close_to(power, -1.0)) return log_power >= -1.0 - 1e-12;
      return power > -1.0;
  }
  return false;
}

std::string Asymptote::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::exp_growth: return "exp-growth";
    case Kind::exp_decay: return "exp-decay";
    case Kind::power_log:
      os << "t^" << power;
      if (log_power != 0.0) os << " (ln t)^" << log_power;
      return os.str();
  }
  return "?";
}

std::optional<Asymptote> times(const Asymptote& x, const Asymptote& y) {
  using K = Asymptote::Kind;
  if (x.kind == K::power_log && y.kind == K::power_log)
    return Asymptote::power_law(x.power + y.power, x.log_power + y.log_power);
  if (x.kind == K::power_log) return y;
  if (y.kind == K::power_log) return x;
  if (x.kind == y.kind) return x;
  return std::nullopt;
}

Asymptote raise(const Asymptote& x, double exponent) {
  using K = Asymptote::Kind;
  if (exponent == 0.0) return Asymptote::constant();
  switch (x.kind) {
    case K::power_log:
      return Asymptote::power_law(x.power * exponent, x.log_power * exponent);
    case K::exp_growth:
      return exponent > 0.0 ? Asymptote::growth() : Asymptote::decay();
    case K::exp_decay:
      return exponent > 0.0 ? Asymptote::decay() : Asymptote::growth();
  }
  return x;
}

Asymptote plus(const Asymptote& x, const Asymptote& y) {
  using K = Asymptote::Kind;
  if (x.kind == K::exp_growth || y.kind == K::exp_decay) return x;
  if (y.kind == K::exp_growth || x.kind == K::exp_decay) return y;
  if (close_to(x.power, y.power))
    return x.log_power >= y.log_power ? x : y;
  return x.power > y.power ? x : y;
}

const char* to_string(ProbeResult::Verdict v) {
  switch (v) {
    case ProbeResult::Verdict::convergent: return "convergent";
    case ProbeResult::Verdict::divergent: return "divergent";
    case ProbeResult::Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

// Wynn's epsilon algorithm on a window of partial sums; returns the deepest
// even-column entry (the accelerated limit), or NaN if the table breaks down.
static double wynn_epsilon(const std::vector<double>& s) {
  const std::size_t m = s.size();
  if (m < 3) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> prev(m + 1, 0.0), cur(s.begin(), s.end());
  double best = s.back();
  for (std::size_t col = 1; col < m; ++col) {
    std::vector<double> next(m - col);
    for (std::size_t i = 0; i + col < m; ++i) {
      const double d = cur[i + 1] - cur[i];
      if (d == 0.0 || !std::isfinite(d)) return best;
      next[i] = prev[i + 1] + 1.0 / d;
    }
    prev = cur;
    cur = next;
    if (col % 2 == 0) best = cur.back();
  }
  return best;
}

ProbeResult integrate_to_infinity(const IntegrandSpec& spec, double a,
                                  const ProbeOptions& options) {
  using V = ProbeResult::Verdict;
  ProbeResult out;
  const double tol = options.tolerance;
  QuadOptions piece_opt;
  piece_opt.abs_tol = tol * 1e-3;

  double quad_err = 0.0;
  double prev_T = a;
  double T = a + options.delta;
  Estimate first = integrate_finite(spec, a, T, piece_opt);
  double total = first.value;
  quad_err += first.abs_err;
  out.partials.push_back(total);

  std::vector<double> inc;       // increments over [T_{k-1}, T_k]
  std::vector<double> limit;     // geometric extrapolations of the total
  std::vector<double> ratio;
  constexpr int kMinDecisionIndex = 4;
  constexpr double kFlat = 1e-8;
  constexpr std::size_t kEpsWindow = 12;

  auto finish = [&](V verdict, double value, double err, std::string why) {
    out.verdict = verdict;
    out.value = value;
    out.abs_err = err;
    out.diagnostic = std::move(why);
    return out;
  };

  // Verdict from the last three increments, if they settle one.
  auto decide = [&]() -> std::optional<ProbeResult> {
    const std::size_t n = inc.size();
    const double scale = std::max(1.0, std::abs(total));
    const double rho = ratio[n - 1];
    bool small = true, negligible = true, flat = true;
    for (std::size_t j = n - 3; j < n; ++j) {
      small = small && inc[j] <= tol * scale;
      negligible = negligible && inc[j] <= 1e-3 * tol * scale;
      flat = flat && inc[j] > 0.0 && ratio[j] >= 1.0 - kFlat;
    }
    // Fast decay: three small increments and a small geometric tail.
    if (small) {
      double tail = 0.0;
      if (inc[n - 1] > 0.0)
        tail = rho >= 0.0 && rho < 1.0 ? inc[n - 1] * rho / (1.0 - rho) : kInf;
      if (tail <= tol * scale)
        return finish(V::convergent, total + tail, tail + quad_err,
                      "increments below tolerance");
      // Below the quadrature noise floor the ratios carry no information.
      if (negligible)
        return finish(V::convergent, total, 3.0 * inc[n - 1] + quad_err,
                      "increments below the quadrature noise floor");
    }
    // Increments that do not shrink: the partial integrals grow without
    // bound.
    if (flat && options.allow_divergent) {
      std::ostringstream os;
      os << "increments bounded below (last ratio " << rho << ")";
      return finish(V::divergent, kInf, kInf, os.str());
    }
    // Geometric decay: successive extrapolated limits agree.
    if (n >= 4 && std::isfinite(limit[n - 1]) && std::isfinite(limit[n - 2]) &&
        std::isfinite(limit[n - 3])) {
      const double d1 = std::abs(limit[n - 1] - limit[n - 2]);
      const double d2 = std::abs(limit[n - 2] - limit[n - 3]);
      const double lscale = std::max(1.0, std::abs(limit[n - 1]));
      if (d1 <= tol * lscale && d2 <= tol * lscale) {
        std::ostringstream os;
        os << "geometric tail extrapolation (ratio " << rho << ")";
        return finish(V::convergent, limit[n - 1], d1 + quad_err, os.str());
      }
    }
    // Slowly decaying increments (power-law tails with lower-order
    // corrections): epsilon-algorithm limits on three sliding windows agree.
    bool shrinking = n >= kEpsWindow + 2;
    for (std::size_t j = n - 3; shrinking && j < n; ++j)
      shrinking = ratio[j] >= 0.0 && ratio[j] < 1.0;
    if (shrinking) {
      const auto& P = out.partials;
      double e[3];
      for (int w = 0; w < 3; ++w) {
        const std::size_t end = P.size() - 2 + w;
        e[w] = wynn_epsilon({P.begin() + (end - kEpsWindow), P.begin() + end});
      }
      const double lscale = std::max(1.0, std::abs(e[2]));
      const double d1 = std::abs(e[2] - e[1]), d2 = std::abs(e[1] - e[0]);
      if (std::isfinite(e[2]) && e[2] >= total && d1 <= tol * lscale &&
          d2 <= tol * lscale) {
        std::ostringstream os;
        os << "epsilon-algorithm extrapolation (ratio " << rho << ")";
        return finish(V::convergent, e[2], d1 + d2 + quad_err, os.str());
      }
    }
    return std::nullopt;
  };

  for (int k = 1; k <= options.max_doublings; ++k) {
    prev_T = T;
    T = a + std::ldexp(options.delta, k);
    Estimate piece{};
    try {
      piece = integrate_finite({spec.fn, Singularity::none}, prev_T, T,
                               piece_opt);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::non_finite) throw;
      return finish(V::inconclusive, total, kInf,
                    std::string("integrand stopped being finite: ") + e.what());
    }
    quad_err += piece.abs_err;
    total += piece.value;
    out.partials.push_back(total);
    if (!std::isfinite(total))
      return finish(V::divergent, kInf, kInf, "partial integral overflowed");
    inc.push_back(piece.value);

    const std::size_t n = inc.size();
    double rho = -1.0;
    if (n >= 2 && inc[n - 2] > 0.0) rho = inc[n - 1] / inc[n - 2];
    ratio.push_back(rho);
    double lim = total;
    if (rho >= 0.0 && rho < 1.0 - kFlat)
      lim = total + inc[n - 1] * rho / (1.0 - rho);
    else if (inc[n - 1] > 0.0)
      lim = kInf;
    limit.push_back(lim);

    if (k < kMinDecisionIndex || n < 3) continue;
    if (auto settled = decide(); settled && options.early_exit)
      return *settled;
  }

  if (inc.size() >= 3) {
    if (auto settled = decide()) return *settled;
  }
  std::ostringstream os;
  os << "no verdict after " << options.max_doublings << " doublings (I = "
     << total << ")";
  return finish(V::inconclusive, total, kInf, os.str());
}

ProbeResult divergence_probe(const IntegrandSpec& spec, double a,
                             const std::optional<Asymptote>& hint,
                             const ProbeOptions& options) {
  ProbeResult numeric = integrate_to_infinity(spec, a, options);
  if (!hint) return numeric;

  const bool diverges = hint->integral_diverges();
  if (numeric.conclusive() && numeric.divergent() != diverges) {
    std::ostringstream os;
    os << "symbolic rule (integrand ~ " << hint->to_string() << ") says "
       << (diverges ? "divergent" : "convergent") << " but the numeric probe says "
       << to_string(numeric.verdict) << " (" << numeric.diagnostic << ")";
    throw Error(ErrorKind::conflicting_evidence, os.str());
  }
  ProbeResult out = numeric;
  out.verdict = diverges ? ProbeResult::Verdict::divergent
                         : ProbeResult::Verdict::convergent;
  out.diagnostic = "symbolic rule, integrand ~ " + hint->to_string() +
                   "; numeric cross-check " + to_string(numeric.verdict);
  if (diverges) {
    out.value = kInf;
    out.abs_err = kInf;
  }
  return out;
}

}  // namespace osserman
