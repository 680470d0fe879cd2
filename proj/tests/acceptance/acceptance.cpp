// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "osserman/barrier.hpp"
#include "osserman/bounds.hpp"
#include "osserman/classify.hpp"
#include "osserman/error.hpp"
#include "osserman/ode.hpp"
#include "osserman/parallel.hpp"
#include "osserman/pucci.hpp"

using namespace osserman;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kPi = std::acos(-1.0);
const Expr t = Expr::identity();

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Nonlinearity constant(double k) {
  return Nonlinearity(Expr::constant(k), {}, k, GrowthClass::bounded());
}
Nonlinearity exp_f() {
  return Nonlinearity(Expr::exp(t), {}, kInf, GrowthClass::exponential());
}
Nonlinearity softplus_f() {
  return Nonlinearity(Expr::softplus(t), {}, kInf, GrowthClass::power(1.0));
}
Nonlinearity softplus_pow(double p) {
  return Nonlinearity(Expr::power(Expr::softplus(t), p), {}, kInf,
                      GrowthClass::power(p));
}
// -e^{-t}: negative, increasing to 0.
Nonlinearity decay_g() {
  return Nonlinearity(Expr::scale(-1, Expr::exp(Expr::affine(-1, 0, t))), {},
                      0.0);
}

Regime regime_of(const Nonlinearity& g) { return detect_regime(g); }

ProblemSpec problem(const Nonlinearity& f, const Nonlinearity& g, double q,
                    double c, double a) {
  ProblemSpec s{f, g, q, c, a};
  return s;
}

// 1. Exact quadratic solution.
Outcome exact_solution() {
  const auto start = Clock::now();
  ProblemSpec s = problem(constant(1), constant(0), 1, 3, 0);
  s.tol.r_max = 10;
  const SolveOutcome o = solve_radial(s);
  const double elapsed = seconds_since(start);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double r = 10.0 * i / 1000.0;
    const double phi = o.trajectory.a() + o.trajectory.at(r).u;
    const double exact = r * r / 6.0;
    worst = std::max(worst, exact > 0 ? std::abs(phi - exact) / exact
                                      : std::abs(phi));
  }
  for (const auto& p : o.trajectory.samples())
    if (p.r > 0)
      worst = std::max(worst, std::abs(o.trajectory.phi(p) * 6 / (p.r * p.r) - 1));
  const bool ok = o.status == SolveOutcome::Status::global &&
                  o.trajectory.r_end() == 10.0 && worst <= 1e-8 && elapsed < 1.0;
  return {ok, "max relative error " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

// Blow-up radius of phi'' = e^phi, phi(0) = a, from the first integral,
// by exp-sinh quadrature of the tail integral.
double first_integral_radius(double a) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto fn = [a](double s) {
    return 1.0 / std::sqrt(2.0 * std::exp(a) * std::expm1(s));
  };
  return integrator.integrate(fn, 1e-14);
}

// 2. Blow-up radius oracle.
Outcome blowup_oracle() {
  const auto start = Clock::now();
  Outcome out;
  std::ostringstream os;
  double worst_width = 0.0;
  for (double a : {-1.0, 0.0, 1.0, 2.0}) {
    const double oracle = first_integral_radius(a);
    const double closed = kPi / std::sqrt(2.0) * std::exp(-a / 2);
    const SolveOutcome o = solve_radial(problem(exp_f(), constant(0), 1, 1, a));
    if (!o.certified_blowup()) {
      out.pass = false;
      os << "a = " << a << ": no certified bracket; ";
      continue;
    }
    const auto& b = *o.bracket;
    worst_width = std::max(worst_width, b.high - b.low);
    if (!(b.low <= oracle && oracle <= b.high && b.high - b.low <= 1e-3 &&
          std::abs(oracle - closed) <= 1e-9 * closed)) {
      out.pass = false;
      os << "a = " << a << ": [" << fmt(b.low) << ", " << fmt(b.high)
         << "] vs " << fmt(oracle) << "; ";
    }
  }
  const double elapsed = seconds_since(start);
  out.pass = out.pass && elapsed < 5.0;
  os << "widest bracket " << fmt(worst_width) << ", " << fmt(elapsed) << " s";
  out.detail = os.str();
  return out;
}

// 3. Gradient and radius sandwich on random instances.
struct RandomInstance {
  ProblemSpec spec;
  std::string label;
};

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto pick = [&](int n) { return int(U(rng) * n) % n; };
  Expr fe = Expr::constant(1), ge = Expr::constant(0);
  std::ostringstream label;
  switch (pick(4)) {
    case 0: {
      const double al = 0.3 + 1.2 * U(rng), be = -1 + 2 * U(rng);
      fe = Expr::exp(Expr::affine(al, be, t));
      break;
    }
    case 1:
      fe = Expr::scale(0.5 + 1.5 * U(rng), Expr::softplus(t));
      break;
    case 2:
      fe = Expr::power(Expr::softplus(t), 1.0 + 2.0 * U(rng));
      break;
    default:
      fe = Expr::sum({Expr::constant(0.1 + U(rng)), Expr::exp(t)});
      break;
  }
  switch (pick(4)) {
    case 0: ge = Expr::constant(0); break;
    case 1: ge = Expr::constant(-1.5 + 3.0 * U(rng)); break;
    case 2: ge = Expr::affine(0.1 + 0.9 * U(rng), -0.5 + U(rng), t); break;
    default:
      ge = Expr::scale(-(0.2 + U(rng)), Expr::exp(Expr::affine(-1, 0, t)));
      break;
  }
  const double q = 0.2 + 1.8 * U(rng);
  const double c = 1.0 + 4.0 * U(rng);
  const double a = -2.0 + 5.0 * U(rng);
  label << "f = " << fe.to_string() << ", g = " << ge.to_string()
        << ", q = " << fmt(q) << ", c = " << fmt(c) << ", a = " << fmt(a);
  return {problem(Nonlinearity(fe), Nonlinearity(ge), q, c, a), label.str()};
}

Outcome sandwich_suite() {
  constexpr int kCount = 120;
  std::mt19937_64 rng(20240601);
  std::vector<RandomInstance> cases;
  for (int i = 0; i < kCount; ++i) cases.push_back(random_instance(rng));
  struct Result {
    bool ok = false;
    std::size_t inequalities = 0;
    std::size_t samples = 0;
    double worst = -kInf;
    std::string message;
  };
  std::vector<Result> results(cases.size());
  parallel_for(cases.size(), worker_count(), [&](std::size_t i) {
    Result& r = results[i];
    try {
      const SolveOutcome o = solve_radial(cases[i].spec);
      const CheckReport st = structural_check(o, cases[i].spec, 1e-6);
      const CheckReport sw = sandwich_check(o, cases[i].spec, 1e-6);
      r.ok = st.passed() && sw.passed();
      r.inequalities = st.checked.size() + sw.checked.size();
      r.samples = st.samples;
      r.worst = std::max(st.worst_relative, sw.worst_relative);
      if (!r.ok) r.message = st.summary() + "; " + sw.summary();
    } catch (const std::exception& e) {
      r.message = e.what();
    }
  });
  Outcome out;
  std::size_t checks = 0, samples = 0;
  double worst = -kInf;
  int failed = 0;
  std::ostringstream os;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    checks += results[i].inequalities * results[i].samples;
    samples += results[i].samples;
    worst = std::max(worst, results[i].worst);
    if (!results[i].ok) {
      if (failed++ < 3)
        os << "[" << cases[i].label << ": " << results[i].message << "] ";
    }
  }
  out.pass = failed == 0;
  os << kCount << " instances, " << samples << " samples, " << checks
     << " inequality evaluations, " << failed
     << " failing instances, worst relative violation " << fmt(worst);
  out.detail = os.str();
  return out;
}

// 4. Barrier dichotomy and limits.
Outcome barrier_limits() {
  Outcome out;
  std::ostringstream os;
  const BarrierProblem classic(exp_f(), constant(0), 2, 2,
                               {Regime::Tag::g_zero_limit, 0.0});
  const BarrierTable tab = tabulate(classic, -2, 20, 20, worker_count());
  double worst = 0.0;
  for (std::size_t i = 0; i < tab.a().size(); ++i) {
    const double exact = kPi * std::exp(-tab.a()[i] / 2);
    worst = std::max(worst, std::abs(tab.values()[i] - exact) / exact);
  }
  bool small = true;
  for (double a : {12.0, 14.0, 20.0, 40.0})
    small = small && barrier_estimate(classic, a).value <= 1e-2;
  for (std::size_t i = 0; i < tab.a().size(); ++i)
    if (tab.a()[i] >= 12) small = small && tab.values()[i] <= 1e-2;
  os << "closed form over " << tab.a().size() << " points, worst relative "
     << fmt(worst) << "; R <= 1e-2 beyond 12: " << (small ? "yes" : "no");
  out.pass = worst <= 1e-6 && small;

  // Finite tables are nonincreasing; divergent data give all-infinite tables.
  struct Case {
    std::string name;
    BarrierProblem p;
    bool finite;
  };
  std::vector<Case> cases{
      {"exp, g = 1, q = 2", {exp_f(), constant(1), 2, 3, {Regime::Tag::g_positive_limit, 1}}, true},
      {"softplus^2, g = 0.5, q = 0.5", {softplus_pow(2), constant(0.5), 0.5, 2, {Regime::Tag::g_positive_limit, 0.5}}, true},
      {"exp, g = -e^-t, q = 1", {exp_f(), decay_g(), 1, 2, {Regime::Tag::g_zero_limit, 0}}, true},
      {"softplus^3, g = -1, q = 2", {softplus_pow(3), constant(-1), 2, 3, {Regime::Tag::g_negative_limit, -1}}, true},
      {"softplus, g = 0, q = 1", {softplus_f(), constant(0), 1, 2, {Regime::Tag::g_zero_limit, 0}}, false},
      {"softplus^2, g = -1, q = 2", {softplus_pow(2), constant(-1), 2, 2, {Regime::Tag::g_negative_limit, -1}}, false},
  };
  for (const auto& c : cases) {
    try {
      const BarrierTable bt = tabulate(c.p, -2, 8, 10, worker_count());
      bool ok = bt.infinite() == !c.finite;
      for (std::size_t i = 0; i < bt.values().size(); ++i) {
        ok = ok && std::isinf(bt.values()[i]) == bt.infinite();
        if (i > 0 && !bt.infinite())
          ok = ok && bt.values()[i] <= bt.values()[i - 1] + bt.errors()[i] +
                                            bt.errors()[i - 1];
      }
      if (!ok) {
        out.pass = false;
        os << "; " << c.name << " table not as expected";
      }
    } catch (const std::exception& e) {
      out.pass = false;
      os << "; " << c.name << ": " << e.what();
    }
  }
  os << "; " << cases.size() << " dichotomy tables checked";
  out.detail = os.str();
  return out;
}

// Catalog shared by criteria 5, 8 and 9.
struct CatalogCase {
  std::string name;
  Nonlinearity f, g;
  double q;
  Existence expected;
};

std::vector<CatalogCase> catalog() {
  Nonlinearity g_sp(Expr::softplus(t), {}, kInf, GrowthClass::power(1.0));
  return {
      {"exp, g = 1, q = 1.5", exp_f(), constant(1), 1.5, Existence::no},
      {"softplus, g = 0.5, q = 1.2", softplus_f(), constant(0.5), 1.2, Existence::no},
      {"softplus, g = 1, q = 0.5", softplus_f(), constant(1), 0.5, Existence::yes},
      {"softplus, g = softplus, q = 1", softplus_f(), g_sp, 1, Existence::no},
      {"softplus, g = 0, q = 1", softplus_f(), constant(0), 1, Existence::yes},
      {"exp, g = 0, q = 1", exp_f(), constant(0), 1, Existence::no},
      {"exp, g = -e^-t, q = 1", exp_f(), decay_g(), 1, Existence::no},
      {"softplus, g = -e^-t, q = 1", softplus_f(), decay_g(), 1, Existence::yes},
      {"softplus^2, g = -1, q = 2", softplus_pow(2), constant(-1), 2, Existence::yes},
      {"exp, g = -1, q = 2", exp_f(), constant(-1), 2, Existence::no},
      {"softplus^3, g = -1, q = 2", softplus_pow(3), constant(-1), 2, Existence::no},
      {"softplus, g = -1, q = 1", softplus_f(), constant(-1), 1, Existence::yes},
  };
}

enum class RadialStatus { global, blowup, undetermined };

const char* to_string(RadialStatus s) {
  switch (s) {
    case RadialStatus::global: return "global";
    case RadialStatus::blowup: return "blow-up";
    case RadialStatus::undetermined: return "undetermined";
  }
  return "?";
}

// Blow-up needs a certified bracket. A run that reaches r_max is global; so is
// one stopped at the cap when the radius-space lower bound, the integral of
// 1 / (upper gradient bound), diverges.
RadialStatus radial_status(const ProblemSpec& s, const SolveOutcome& o) {
  if (o.certified_blowup()) return RadialStatus::blowup;
  if (o.status == SolveOutcome::Status::global) return RadialStatus::global;
  BoundFamily B(s.f, s.g, s.q, s.c, s.a);
  IntegrandSpec inv{[&B](double u) {
                      double up = B.upper_plus(u);
                      if (B.g_nonpositive_everywhere())
                        up = std::min(up, B.upper_minus(u));
                      return 1.0 / up;
                    },
                    Singularity::inverse_sqrt};
  const ProbeResult pr = integrate_to_infinity(inv, 0.0);
  return pr.divergent() ? RadialStatus::global : RadialStatus::undetermined;
}

struct CatalogRun {
  const CatalogCase* c;
  double a;
  ProblemSpec spec;
  std::optional<SolveOutcome> outcome;
  RadialStatus status = RadialStatus::undetermined;
  std::string error;
};

constexpr int kCatalogDim = 2;

std::vector<CatalogRun> run_catalog(const std::vector<CatalogCase>& cat) {
  std::vector<CatalogRun> runs;
  for (const auto& c : cat)
    for (double a : {-1.0, 0.0, 5.0}) {
      ProblemSpec s = problem(c.f, c.g, c.q, kCatalogDim, a);
      s.tol.r_max = 1e3;
      runs.push_back({&c, a, s, std::nullopt, RadialStatus::undetermined, ""});
    }
  parallel_for(runs.size(), worker_count(), [&](std::size_t i) {
    try {
      runs[i].outcome = solve_radial(runs[i].spec);
      runs[i].status = radial_status(runs[i].spec, *runs[i].outcome);
    } catch (const std::exception& e) {
      runs[i].error = e.what();
    }
  });
  return runs;
}

// 5. Classifier against the solver.
Outcome classifier_consistency(const std::vector<CatalogCase>& cat,
                               const std::vector<CatalogRun>& runs) {
  Outcome out;
  std::ostringstream os;
  int conclusive = 0, agreements = 0, expected_ok = 0;
  for (const auto& c : cat) {
    Verdict v;
    try {
      v = classify(c.f, c.g, c.q, Operator::m_plus_01());
    } catch (const std::exception& e) {
      out.pass = false;
      os << "[" << c.name << ": " << e.what() << "] ";
      continue;
    }
    if (v.exists_entire == c.expected) ++expected_ok;
    else {
      out.pass = false;
      os << "[" << c.name << ": verdict " << to_string(v.exists_entire)
         << ", expected " << to_string(c.expected) << "] ";
    }
    if (v.exists_entire == Existence::inconclusive) continue;
    ++conclusive;
    const RadialStatus want = v.exists_entire == Existence::yes
                                  ? RadialStatus::global
                                  : RadialStatus::blowup;
    bool agree = true;
    for (const auto& r : runs) {
      if (r.c != &c) continue;
      if (!r.error.empty() || r.status != want) {
        agree = false;
        os << "[" << c.name << ", a = " << r.a << ": "
           << (r.error.empty() ? to_string(r.status) : r.error) << "] ";
      }
    }
    if (agree) ++agreements;
    else out.pass = false;
  }
  int at_rmax = 0, by_tail = 0, blowups = 0;
  for (const auto& r : runs) {
    if (r.status == RadialStatus::blowup) ++blowups;
    if (r.status == RadialStatus::global) {
      if (r.outcome->status == SolveOutcome::Status::global) ++at_rmax;
      else ++by_tail;
    }
  }
  os << cat.size() << " cases, " << expected_ok << " expected verdicts, "
     << conclusive << " conclusive, " << agreements
     << " agree with the solver at a in {-1, 0, 5} (" << blowups
     << " certified blow-ups, " << at_rmax << " runs reached r_max, " << by_tail
     << " global by a divergent radius lower bound)";
  out.detail = os.str();
  return out;
}

// 6. Operator kernel.
Outcome operator_kernel() {
  Outcome out;
  std::ostringstream os;
  for (const auto& op : {Operator::m_plus_01(), Operator::p_plus_k(1),
                         Operator::p_plus_k(2), Operator::p_plus_k(3)}) {
    const EllipticityReport rep = ellipticity_check(op, 1000, 7);
    if (!rep.passed() || rep.f_of_zero != 0.0) out.pass = false;
    os << op.to_string() << ": " << rep.violations << " violations; ";
  }
  // Closed-form radial spectrum against the eigensolver.
  double gap = 0.0;
  int points = 0;
  for (int n : {2, 3, 5}) {
    const ProblemSpec s = problem(exp_f(), constant(1), 1, n, 0);
    const SolveOutcome o = solve_radial(s);
    RadialLift lift(std::vector<double>(n, 0.0),
                    std::make_shared<const Trajectory>(o.trajectory));
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> x(n);
      double r2 = 0.0;
      for (double& v : x) { v = U(rng); r2 += v * v; }
      const double scale = o.trajectory.r_end() * std::pow(std::abs(U(rng)), 1.0 / n) /
                           std::sqrt(r2);
      for (double& v : x) v *= scale;
      const RadialDerivatives d = radial_hessian(lift, x);
      const double norm = std::max(1.0, d.hessian.frobenius());
      for (const auto& op : {Operator::m_plus_01(), Operator::p_plus_k(1),
                             Operator::p_plus_k(n)}) {
        gap = std::max(gap, std::abs(apply_to_spectrum(op, d.spectrum, norm) -
                                     apply(op, d.hessian)) / norm);
      }
      ++points;
    }
  }
  out.pass = out.pass && gap <= 1e-10;
  os << "closed form vs eigensolver on " << points << " radial Hessians, gap "
     << fmt(gap);
  out.detail = os.str();
  return out;
}

// 7. Radial lifts solve the PDE.
Outcome radial_verification() {
  Outcome out;
  std::ostringstream os;
  struct Data {
    std::string name;
    Nonlinearity f, g;
    double q;
    double a;
  };
  const std::vector<Data> any_g{
      {"exp, g = 0, q = 1", exp_f(), constant(0), 1, 0},
      {"exp, g = 1, q = 1", exp_f(), constant(1), 1, -1},
      {"softplus^2, g = 0.5, q = 1.2", softplus_pow(2), constant(0.5), 1.2, 0.5},
      {"softplus, g = -1, q = 2", softplus_f(), constant(-1), 2, 0},
  };
  const std::vector<Data> nonneg_g{any_g[0], any_g[1], any_g[2],
                                   {"softplus, g = 1, q = 0.5", softplus_f(), constant(1), 0.5, 1}};
  double worst = 0.0;
  int runs = 0;
  auto run = [&](const Data& d, const Operator& op, int n, double c) {
    try {
      const ProblemSpec s = problem(d.f, d.g, d.q, c, d.a);
      const SolveOutcome o = solve_radial(s);
      RadialLift lift(std::vector<double>(n, 0.0),
                      std::make_shared<const Trajectory>(o.trajectory));
      const RadialCheckReport rep = verify_radial_solution(lift, s, op, 200, 11);
      worst = std::max(worst, rep.max_residual);
      ++runs;
      if (rep.points < 200 || rep.max_residual > 1e-6 || !rep.operators_agree()) {
        out.pass = false;
        os << "[" << op.to_string() << " n = " << n << ", " << d.name << ": "
           << rep.summary() << "] ";
      }
    } catch (const std::exception& e) {
      out.pass = false;
      os << "[" << op.to_string() << " n = " << n << ", " << d.name << ": "
         << e.what() << "] ";
    }
  };
  for (int n : {2, 3, 5})
    for (const auto& d : any_g) run(d, Operator::m_plus_01(), n, n);
  for (int k : {1, 2})
    for (const auto& d : nonneg_g) run(d, Operator::p_plus_k(k), 4, k);
  os << runs << " trajectories x 200 points, worst residual / (1 + |f|) "
     << fmt(worst);
  out.detail = os.str();
  return out;
}

std::optional<BarrierProblem> matching_barrier(const CatalogRun& r,
                                               std::string& why) {
  try {
    return BarrierProblem(r.c->f, r.c->g, r.c->q, kCatalogDim, regime_of(r.c->g));
  } catch (const Error& e) {
    why = e.what();
    return std::nullopt;
  }
}

// 8. Bound self-consistency.
Outcome bound_consistency(const std::vector<CatalogRun>& runs) {
  Outcome out;
  std::ostringstream os;
  int instances = 0, skipped = 0;
  double worst = -kInf;
  for (const auto& r : runs) {
    if (r.status != RadialStatus::blowup) continue;
    std::string why;
    const auto p = matching_barrier(r, why);
    if (!p) {
      ++skipped;
      continue;
    }
    try {
      const BarrierTable table = tabulate(*p, r.a - 1, r.a + 20, 12, worker_count());
      const double t0 = threshold_t0(r.c->g);
      const Trajectory& tr = r.outcome->trajectory;
      const double R_low = r.outcome->bracket->low;
      const auto ball =
          DomainShape::ball(std::vector<double>(kCatalogDim, 0.0), R_low);
      for (int i = 0; i < 100; ++i) {
        const double rad = R_low * i / 100.0;
        const double phi = tr.a() + tr.at(rad).u;
        const double bound = upper_bound(table, ball, t0, {rad, 0.0});
        worst = std::max(worst, phi - bound);
        if (!(phi <= bound + 1e-6)) {
          out.pass = false;
          os << "[" << r.c->name << ", a = " << r.a << ", r = " << fmt(rad)
             << ": phi " << fmt(phi) << " > " << fmt(bound) << "] ";
          break;
        }
      }
      ++instances;
    } catch (const std::exception& e) {
      out.pass = false;
      os << "[" << r.c->name << ", a = " << r.a << ": " << e.what() << "] ";
    }
  }
  if (instances == 0) out.pass = false;
  os << instances << " blow-up instances x 100 radii, worst phi - bound "
     << fmt(worst) << " (" << skipped << " outside the barrier hypotheses)";

  // Closed-form bound with q = 2, g = 1, f = exp.
  double ratio = 0.0;
  for (int n : {2, 3}) {
    const BarrierProblem p(exp_f(), constant(1), 2, n,
                           {Regime::Tag::g_positive_limit, 1.0});
    const BarrierTable tab = tabulate(p, 0, 2, 3);
    for (std::size_t i = 0; i < tab.a().size(); ++i) {
      const double cap = kPi * n / (2 * std::sqrt(std::exp(tab.a()[i])));
      ratio = std::max(ratio, tab.values()[i] / cap);
      if (!(tab.values()[i] <= cap)) out.pass = false;
    }
  }
  os << "; R(a) / (pi n / (2 sqrt(e^a))) at most " << fmt(ratio);
  out.detail = os.str();
  return out;
}

// 9. Blow-up radius below the barrier.
Outcome bracket_vs_barrier(const std::vector<CatalogRun>& runs) {
  Outcome out;
  std::ostringstream os;
  int matched = 0, skipped = 0;
  double worst = 0.0;
  for (const auto& r : runs) {
    if (r.status != RadialStatus::blowup) continue;
    std::string why;
    const auto p = matching_barrier(r, why);
    if (!p) {
      ++skipped;
      continue;
    }
    try {
      const double R = barrier_estimate(*p, r.a).value;
      const double low = r.outcome->bracket->low;
      worst = std::max(worst, low / R);
      ++matched;
      if (!(low <= R * (1 + 1e-6))) {
        out.pass = false;
        os << "[" << r.c->name << ", a = " << r.a << ": " << fmt(low) << " > "
           << fmt(R) << "] ";
      }
    } catch (const std::exception& e) {
      out.pass = false;
      os << "[" << r.c->name << ", a = " << r.a << ": " << e.what() << "] ";
    }
  }
  if (matched == 0) out.pass = false;
  os << matched << " instances, largest low / R(a) " << fmt(worst) << " ("
     << skipped << " outside the barrier hypotheses)";
  out.detail = os.str();
  return out;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&failures](int id, const std::string& name,
                            const std::function<Outcome()>& fn) {
    Outcome o;
    const auto start = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": "
              << name << " -- " << o.detail << " [" << fmt(seconds_since(start))
              << " s]" << std::endl;
    if (!o.pass) ++failures;
  };

  report(1, "exact solution", exact_solution);
  report(2, "blow-up radius oracle", blowup_oracle);
  report(3, "gradient and radius bounds", sandwich_suite);
  report(4, "barrier dichotomy and limits", barrier_limits);
  const auto cat = catalog();
  const auto runs = run_catalog(cat);
  report(5, "classifier and solver agree",
         [&] { return classifier_consistency(cat, runs); });
  report(6, "operator kernel", operator_kernel);
  report(7, "radial verification", radial_verification);
  report(8, "bound self-consistency", [&] { return bound_consistency(runs); });
  report(9, "blow-up bracket below the barrier",
         [&] { return bracket_vs_barrier(runs); });
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
