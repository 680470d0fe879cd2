#include "osserman/barrier.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "osserman/error.hpp"
#include "osserman/parallel.hpp"

namespace osserman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvertCeiling = 1e6;

bool f_tends_to_infinity(const Nonlinearity& f, std::string& why) {
  if (auto L = f.limit_at_infinity()) {
    if (std::isinf(*L) && *L > 0) return true;
    why = "f has the finite limit " + std::to_string(*L);
    return false;
  }
  if (auto gc = f.growth()) {
    if (gc->kind == GrowthClass::Kind::bounded) {
      why = "f is declared bounded";
      return false;
    }
    return true;
  }
  why = "f has no declared growth; f -> +inf not confirmed";
  return false;
}

ConditionReport regime_condition(const BarrierProblem& p) {
  switch (p.regime.tag) {
    case Regime::Tag::g_positive_limit:
      return condition_ns_plus(p.f, p.g, p.q);
    case Regime::Tag::g_zero_limit: return condition_ns_zero(p.f, p.g, p.q);
    case Regime::Tag::g_negative_limit:
      return condition_ns_minus(p.f, p.g, p.q);
  }
  return {};
}

// Integrand in the offset s = t - a together with the prefactor.
struct Formula {
  std::function<double(double)> fn;
  double factor = 1.0;
};

Formula formula(const BarrierProblem& p, double a) {
  const double q = p.q, n = p.n;
  auto F = std::make_shared<CumulativeIntegral>(antiderivative(p.f, a));
  auto inv_sqrt = [](double v) { return std::isinf(v) ? 0.0 : 1.0 / std::sqrt(v); };
  switch (p.regime.tag) {
    case Regime::Tag::g_positive_limit: {
      const SignSplit split = sign_parts(p.g);
      if (q < 2.0) {
        const double e = 1.0 / (2.0 - q);
        auto Gp = std::make_shared<CumulativeIntegral>(
            [gp = split.plus](double t) { return gp(t); }, a, true);
        return {[F, Gp, e](double s) {
                  const double d =
                      std::sqrt(F->at_offset(s)) + std::pow(Gp->at_offset(s), e);
                  return std::isinf(d) ? 0.0 : 1.0 / d;
                },
                2.0 * std::pow(n / (2.0 - q), e)};
      }
      auto psi = std::make_shared<RelaxedIntegral>(
          [f = p.f](double t) { return f(t); },
          [gp = split.plus, n](double t) { return -gp(t) / n; }, a);
      return {[psi, inv_sqrt](double s) { return inv_sqrt(psi->at_offset(s)); },
              std::sqrt(n / 2.0)};
    }
    case Regime::Tag::g_zero_limit: {
      const double factor = std::pow(n, 1.0 / q) / std::sqrt(q);
      // g >= 0 on [a, inf) kills the weight.
      if (p.g(a) >= 0.0)
        return {[F, inv_sqrt](double s) { return inv_sqrt(F->at_offset(s)); },
                factor};
      auto psi = std::make_shared<RelaxedIntegral>(
          [f = p.f](double t) { return f(t); },
          [h = WeightH(p.f, p.g, q)](double t) { return h(t); }, a);
      return {[psi, inv_sqrt](double s) { return inv_sqrt(psi->at_offset(s)); },
              factor};
    }
    case Regime::Tag::g_negative_limit: {
      const SignSplit split = sign_parts(p.g);
      auto Gm = std::make_shared<CumulativeIntegral>(
          [gm = split.minus](double t) { return gm(t); }, a, true);
      return {[F, Gm, q, inv_sqrt](double s) {
                const double Fs = F->at_offset(s);
                if (std::isinf(Fs)) return 0.0;
                return inv_sqrt(Fs) + std::pow(Gm->at_offset(s) / Fs, 1.0 / q);
              },
              2.0 * std::pow(n, 1.0 / q) / q};
    }
  }
  return {};
}

ProbeResult probe(const Formula& fm, double tol, bool known_finite) {
  ProbeOptions opt;
  opt.tolerance = tol;
  if (known_finite) {
    opt.allow_divergent = false;
    opt.max_doublings = 60;
  }
  try {
    return integrate_to_infinity({fm.fn, Singularity::inverse_sqrt}, 0.0, opt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::non_finite) throw;
    ProbeResult r;
    r.diagnostic = e.what();
    return r;
  }
}

}  // namespace

BarrierProblem::BarrierProblem(Nonlinearity f_, Nonlinearity g_, double q_,
                               int n_, Regime regime_)
    : f(std::move(f_)), g(std::move(g_)), q(q_), n(n_), regime(regime_) {
  if (!(q > 0.0 && q <= 2.0))
    throw Error(ErrorKind::hypothesis_violation, "q must lie in (0,2]");
  if (n < 1) throw Error(ErrorKind::hypothesis_violation, "n must be >= 1");
  // Positivity and monotonicity of f are what the barrier needs; strict
  // increase only enters through the comparison argument and is reported.
  auto fr = verify_hypotheses(f, Profile::ode, Role::f);
  if (!fr.passed())
    throw Error(ErrorKind::hypothesis_violation, "f: " + fr.summary());
  if (!verify_hypotheses(f, Profile::comparison, Role::f).passed())
    strict_note = "f is not strictly increasing";
  auto gr = verify_hypotheses(g, Profile::ode, Role::g);
  if (!gr.passed())
    throw Error(ErrorKind::hypothesis_violation, "g: " + gr.summary());
  std::optional<Regime> detected;
  try {
    detected = detect_regime(g);
  } catch (const Error&) {
  }
  if (detected && detected->tag != regime.tag)
    throw Error(ErrorKind::hypothesis_violation,
                std::string("regime ") + to_string(regime.tag) +
                    " does not match g (" + to_string(detected->tag) + ")");
  if (std::isfinite(regime.g_infinity)) {
    std::string why;
    if (!f_tends_to_infinity(f, why)) {
      // Only assumed for a positive limit of g with q > 1; elsewhere it
      // follows from the failure of the existence condition.
      if (regime.tag == Regime::Tag::g_positive_limit && q > 1.0)
        throw Error(ErrorKind::hypothesis_violation,
                    "f must tend to +inf when g has a finite positive limit "
                    "and q > 1: " + why);
      buf_note = why;
    }
  }
  try {
    condition = std::make_shared<const ConditionReport>(regime_condition(*this));
  } catch (const Error&) {
  }
}

BarrierValue barrier_estimate(const BarrierProblem& p, double a,
                              double rel_tol) {
  BarrierValue out;
  const bool holds = p.condition && p.condition->holds();
  const bool fails = p.condition && p.condition->fails();
  if (holds) {
    out.value = out.abs_err = kInf;
    out.diagnostic = "existence condition holds, so the integral diverges";
    return out;
  }
  const Formula fm = formula(p, a);
  ProbeResult r = probe(fm, rel_tol, fails);
  // The probe tolerance is absolute below 1; refine small values.
  if (r.convergent() && r.value < 1.0 && r.value > 0.0) {
    ProbeResult fine = probe(fm, rel_tol * r.value, fails);
    if (fine.convergent()) r = fine;
  }
  out.diagnostic = r.diagnostic;
  if (r.convergent()) {
    out.value = fm.factor * r.value;
    out.abs_err = fm.factor * r.abs_err;
    return out;
  }
  if (r.divergent()) {
    out.value = out.abs_err = kInf;
    return out;
  }
  std::ostringstream os;
  os << "R(" << a << ") could not be certified: " << r.diagnostic;
  throw Error(ErrorKind::inconclusive, os.str());
}

double barrier_value(const Nonlinearity& f, const Nonlinearity& g, double q,
                     int n, const Regime& regime, double a) {
  return barrier_estimate(BarrierProblem(f, g, q, n, regime), a).value;
}

BarrierTable tabulate(const BarrierProblem& p, double a_lo, double a_hi,
                      int points, int threads) {
  if (points < 2)
    throw Error(ErrorKind::out_of_range, "tabulate needs at least 2 points");
  if (!(a_hi > a_lo))
    throw Error(ErrorKind::out_of_range, "tabulate needs a_lo < a_hi");
  BarrierTable t;
  t.problem_ = std::make_shared<const BarrierProblem>(p);
  t.a_.resize(points);
  const double span = a_hi - a_lo + 1.0;
  for (int i = 0; i < points; ++i)
    t.a_[i] = a_lo - 1.0 + std::pow(span, double(i) / (points - 1));
  t.a_.front() = a_lo;
  t.a_.back() = a_hi;

  std::vector<BarrierValue> vals(points);
  parallel_for(std::size_t(points), threads, [&](std::size_t i) {
    vals[i] = barrier_estimate(*t.problem_, t.a_[i]);
  });

  std::size_t finite = 0;
  for (const auto& v : vals) {
    t.values_.push_back(v.value);
    t.errors_.push_back(v.abs_err);
    if (std::isfinite(v.value)) ++finite;
  }
  if (finite != 0 && finite != vals.size())
    throw Error(ErrorKind::monotonicity_violation,
                "table mixes finite and infinite entries");
  t.infinite_ = finite == 0;
  for (int i = 0; i + 1 < points && !t.infinite_; ++i) {
    if (t.values_[i + 1] > t.values_[i] + t.errors_[i] + t.errors_[i + 1]) {
      std::ostringstream os;
      os << std::setprecision(17) << "R(" << t.a_[i + 1]
         << ") = " << t.values_[i + 1] << " exceeds R(" << t.a_[i]
         << ") = " << t.values_[i];
      throw Error(ErrorKind::monotonicity_violation, os.str());
    }
  }
  if (!p.buf_note.empty())
    t.diagnostics_.push_back("growth of f unconfirmed: " + p.buf_note);
  if (!p.strict_note.empty()) t.diagnostics_.push_back(p.strict_note);
  return t;
}

double invert(const BarrierTable& table, double b) {
  if (!(b > 0.0)) throw Error(ErrorKind::out_of_range, "invert needs b > 0");
  if (table.infinite()) return -kInf;
  const BarrierProblem& p = table.problem();
  auto R = [&p](double a) { return barrier_estimate(p, a, 1e-11).value; };
  const auto& as = table.a();
  const auto& vs = table.values();

  double lo, hi, vlo, vhi;
  if (b > vs.front()) {
    // Extend leftward until R exceeds b.
    hi = as.front();
    vhi = vs.front();
    double step = 1.0;
    for (;;) {
      lo = std::max(hi - step, kInvertFloor);
      vlo = R(lo);
      if (vlo >= b) break;
      if (lo == kInvertFloor) return -kInf;
      hi = lo;
      vhi = vlo;
      step *= 2.0;
    }
  } else if (b < vs.back()) {
    lo = as.back();
    vlo = vs.back();
    double step = 1.0;
    for (;;) {
      hi = std::min(lo + step, kInvertCeiling);
      vhi = R(hi);
      if (vhi <= b) break;
      if (hi == kInvertCeiling) return kInf;
      lo = hi;
      vlo = vhi;
      step *= 2.0;
    }
  } else {
    // vs is nonincreasing: first index with vs[i] <= b.
    auto it = std::partition_point(vs.begin(), vs.end(),
                                   [b](double v) { return v > b; });
    const std::size_t i = std::size_t(it - vs.begin());
    if (vs[i] == b) return as[i];
    lo = as[i - 1];
    vlo = vs[i - 1];
    hi = as[i];
    vhi = vs[i];
  }
  if (vlo == b) return lo;
  if (vhi == b) return hi;

  auto fn = [&](double a) { return R(a) - b; };
  auto tol = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x));
  };
  std::uintmax_t iters = 100;
  auto root = boost::math::tools::toms748_solve(fn, lo, hi, vlo - b, vhi - b,
                                                tol, iters);
  const double a = 0.5 * (root.first + root.second);
  return a;
}

std::optional<double> vanishing_point(const BarrierProblem& p, double target) {
  for (double a = 1.0; a <= 1e9; a *= 2.0) {
    const double v = barrier_estimate(p, a).value;
    if (v <= target) return a;
  }
  return std::nullopt;
}

DomainShape DomainShape::ball(std::vector<double> center, double radius) {
  if (center.empty() || !(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorKind::out_of_range, "ball needs a center and radius > 0");
  DomainShape s;
  s.kind_ = Kind::ball;
  s.p_ = std::move(center);
  s.s_ = radius;
  return s;
}

DomainShape DomainShape::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size())
    throw Error(ErrorKind::out_of_range, "box corners must have equal size");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i]))
      throw Error(ErrorKind::out_of_range, "box needs min < max per axis");
  DomainShape s;
  s.kind_ = Kind::box;
  s.p_ = std::move(lo);
  s.q_ = std::move(hi);
  return s;
}

DomainShape DomainShape::half_space(std::vector<double> normal, double offset) {
  double nn = 0.0;
  for (double v : normal) nn += v * v;
  if (normal.empty() || !(nn > 0.0))
    throw Error(ErrorKind::out_of_range, "half-space needs a nonzero normal");
  DomainShape s;
  s.kind_ = Kind::half_space;
  s.p_ = std::move(normal);
  s.s_ = offset;
  return s;
}

std::string DomainShape::to_string() const {
  std::ostringstream os;
  auto vec = [&os](const std::vector<double>& v) {
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
  };
  switch (kind_) {
    case Kind::ball: os << "ball"; vec(p_); os << " r=" << s_; break;
    case Kind::box: os << "box"; vec(p_); vec(q_); break;
    case Kind::half_space: os << "half_space"; vec(p_); os << " >= " << s_; break;
  }
  return os.str();
}

double distance(const DomainShape& shape, const std::vector<double>& x) {
  if (x.size() != shape.dim())
    throw Error(ErrorKind::out_of_range, "point dimension does not match " +
                                             shape.to_string());
  double d = 0.0;
  switch (shape.kind()) {
    case DomainShape::Kind::ball: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        r2 += (x[i] - shape.p()[i]) * (x[i] - shape.p()[i]);
      d = shape.scalar() - std::sqrt(r2);
      break;
    }
    case DomainShape::Kind::box: {
      d = kInf;
      for (std::size_t i = 0; i < x.size(); ++i)
        d = std::min({d, x[i] - shape.p()[i], shape.q()[i] - x[i]});
      break;
    }
    case DomainShape::Kind::half_space: {
      double dot = 0.0, nn = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        dot += shape.p()[i] * x[i];
        nn += shape.p()[i] * shape.p()[i];
      }
      d = (dot - shape.scalar()) / std::sqrt(nn);
      break;
    }
  }
  if (d < 0.0 || std::isnan(d)) {
    std::ostringstream os;
    os << "point lies outside " << shape.to_string() << " (by " << -d << ")";
    throw Error(ErrorKind::outside_domain, os.str());
  }
  return d;
}

double threshold_t0(const Nonlinearity& g) {
  if (g.expr().shape().lo >= 0.0 || g(kInvertFloor) >= 0.0) return -kInf;
  double lo = kInvertFloor, hi;
  if (g(0.0) >= 0.0) {
    hi = 0.0;
    for (double T = -1.0; T > kInvertFloor; T *= 2.0) {
      if (g(T) < 0.0) {
        lo = T;
        break;
      }
      hi = T;
    }
  } else {
    lo = 0.0;
    hi = kInf;
    for (double T = 1.0; T < 1e300; T *= 2.0) {
      if (g(T) >= 0.0) {
        hi = T;
        break;
      }
      lo = T;
    }
    if (std::isinf(hi)) return kInf;
  }
  auto sign = [&g](double t) { return g(t) >= 0.0 ? 1.0 : -1.0; };
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::bisect(
      sign, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return r.second;
}

double upper_bound(const BarrierTable& table, const DomainShape& shape,
                   double t0, const std::vector<double>& x) {
  const double d = distance(shape, x);
  if (table.infinite() || d == 0.0) return kInf;
  const double a = invert(table, d);
  if (table.problem().regime.tag == Regime::Tag::g_positive_limit)
    return std::max(t0, a);
  return a;
}

std::string BoundReport::summary() const {
  std::ostringstream os;
  os << checked << " samples, " << violations.size()
     << " violations, worst margin " << worst_margin;
  for (const auto& v : violations) {
    os << "; u(";
    for (std::size_t i = 0; i < v.x.size(); ++i) os << (i ? "," : "") << v.x[i];
    os << ") = " << v.u << " > " << v.bound;
  }
  return os.str();
}

BoundReport compare_with_radial(const std::vector<FieldSample>& u,
                                const BarrierTable& table,
                                const DomainShape& shape, double t0) {
  BoundReport rep;
  rep.worst_margin = kInf;
  for (const auto& s : u) {
    const double bound = upper_bound(table, shape, t0, s.x);
    ++rep.checked;
    rep.worst_margin = std::min(rep.worst_margin, bound - s.u);
    if (s.u > bound + 1e-8) rep.violations.push_back({s.x, s.u, bound});
  }
  return rep;
}

BoundReport compare_with_radial(
    const std::function<double(const std::vector<double>&)>& u,
    const std::vector<std::vector<double>>& points, const BarrierTable& table,
    const DomainShape& shape, double t0) {
  std::vector<FieldSample> samples;
  samples.reserve(points.size());
  for (const auto& x : points) samples.push_back({x, u(x)});
  return compare_with_radial(samples, table, shape, t0);
}

void write_table_csv(std::ostream& os, const BarrierTable& table) {
  os << "a,R_of_a,err\n" << std::setprecision(17);
  for (std::size_t i = 0; i < table.a().size(); ++i)
    os << table.a()[i] << ',' << table.values()[i] << ','
       << table.errors()[i] << '\n';
}

void write_bound_csv(std::ostream& os, const BarrierTable& table,
                     const DomainShape& shape, double t0,
                     const std::vector<std::vector<double>>& points) {
  for (std::size_t i = 0; i < shape.dim(); ++i) os << 'x' << i << ',';
  os << "d,bound\n" << std::setprecision(17);
  for (const auto& x : points) {
    for (double v : x) os << v << ',';
    os << distance(shape, x) << ',' << upper_bound(table, shape, t0, x)
       << '\n';
  }
}

}  // namespace osserman
