#include "osserman/classify.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "osserman/error.hpp"

namespace osserman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using V = ProbeResult::Verdict;

std::optional<Asymptote> t_times_f_inv_sqrt(const Nonlinearity& f) {
  auto fa = f.asymptote();
  if (!fa) return std::nullopt;
  auto tf = times(Asymptote::power_law(1.0), *fa);
  if (!tf) return std::nullopt;
  return raise(*tf, -0.5);
}

// Asymptote of the antiderivative of a positive nondecreasing function.
std::optional<Asymptote> integrated(const std::optional<Asymptote>& x) {
  if (!x) return std::nullopt;
  switch (x->kind) {
    case Asymptote::Kind::power_log:
      return Asymptote::power_law(x->power + 1.0, x->log_power);
    case Asymptote::Kind::exp_growth: return Asymptote::growth();
    case Asymptote::Kind::exp_decay: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<Asymptote> positive_part_asymptote(const Nonlinearity& g) {
  const auto L = g.limit_at_infinity();
  if (L && std::isfinite(*L) && *L > 0.0) return Asymptote::constant();
  return g.asymptote();
}

bool identically_zero(const Nonlinearity& g) {
  const Shape sh = g.expr().shape();
  if (sh.lo == 0.0 && sh.hi == 0.0) return true;
  if (auto L = g.limit_at_infinity(); !L || *L != 0.0) return false;
  for (double t : hypothesis_sample_grid())
    if (g(t) != 0.0) return false;
  return true;
}

bool nonnegative_everywhere(const Nonlinearity& g) {
  if (g.expr().shape().lo >= 0.0) return true;
  // g is nondecreasing: its infimum is approached at -inf, and the sample
  // grid reaches -100.
  for (double t : hypothesis_sample_grid())
    if (g(t) < 0.0) return false;
  return true;
}

NamedProbe run_probe(const std::string& name, IntegrandSpec spec, double a,
                     const std::optional<Asymptote>& hint) {
  NamedProbe p{name, {}};
  try {
    p.result = divergence_probe(spec, a, hint);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::conflicting_evidence) throw;
    p.result.verdict = V::inconclusive;
    p.result.diagnostic = e.what();
  }
  return p;
}

NamedProbe zero_probe(const std::string& name, const std::string& why) {
  NamedProbe p{name, {}};
  p.result.verdict = V::convergent;
  p.result.diagnostic = "integrand vanishes identically (" + why + ")";
  return p;
}

// Condition "both integrals diverge".
ProbeResult all_diverge(const std::vector<NamedProbe>& ps) {
  ProbeResult r;
  bool all = true, any_conv = false;
  std::ostringstream os;
  for (const auto& p : ps) {
    all = all && p.result.divergent();
    any_conv = any_conv || p.result.convergent();
    os << p.name << ": " << to_string(p.result.verdict) << "; ";
  }
  r.verdict = all ? V::divergent : any_conv ? V::convergent : V::inconclusive;
  r.value = all ? kInf : 0.0;
  r.diagnostic = os.str();
  return r;
}

// Condition "at least one integral diverges" (the integral of a sum).
ProbeResult any_diverges(const std::vector<NamedProbe>& ps) {
  ProbeResult r;
  bool any = false, all_conv = true;
  double value = 0.0, err = 0.0;
  std::ostringstream os;
  for (const auto& p : ps) {
    any = any || p.result.divergent();
    all_conv = all_conv && p.result.convergent();
    value += p.result.value;
    err += p.result.abs_err;
    os << p.name << ": " << to_string(p.result.verdict) << "; ";
  }
  r.verdict = any ? V::divergent : all_conv ? V::convergent : V::inconclusive;
  r.value = any ? kInf : value;
  r.abs_err = any ? kInf : err;
  r.diagnostic = os.str();
  return r;
}

NamedProbe keller_osserman_probe(const Nonlinearity& f) {
  IntegrandSpec s{[f](double t) {
    const double v = t * f(t);
    return std::isinf(v) ? 0.0 : 1.0 / std::sqrt(v);
  }};
  return run_probe("1/(t f)^(1/2)", s, 1.0, t_times_f_inv_sqrt(f));
}

double first_positive_point(const Nonlinearity& g) {
  double T = 1.0;
  for (int i = 0; i < 200 && !(g(T) > 0.0); ++i) T *= 2.0;
  if (!(g(T) > 0.0))
    throw Error(ErrorKind::hypothesis_violation,
                "g never becomes positive although its declared limit is");
  return T;
}

}  // namespace

std::string Operator::to_string() const {
  if (kind == Kind::m_plus_01) return "Mplus01";
  return "Pk(" + std::to_string(k) + ")";
}

const char* to_string(Regime::Tag t) {
  switch (t) {
    case Regime::Tag::g_positive_limit: return "g_positive_limit";
    case Regime::Tag::g_zero_limit: return "g_zero_limit";
    case Regime::Tag::g_negative_limit: return "g_negative_limit";
  }
  return "?";
}

const char* to_string(Condition c) {
  switch (c) {
    case Condition::ns_plus: return "ns_plus";
    case Condition::ns_zero: return "ns_zero";
    case Condition::ns_minus: return "ns_minus";
  }
  return "?";
}

const char* to_string(Existence e) {
  switch (e) {
    case Existence::yes: return "yes";
    case Existence::no: return "no";
    case Existence::inconclusive: return "inconclusive";
  }
  return "?";
}

Regime detect_regime(const Nonlinearity& g) {
  std::optional<double> L = g.limit_at_infinity();
  if (!L && g.expr().kind() == Expr::Kind::constant) L = g(0.0);
  if (!L) {
    const Shape sh = g.expr().shape();
    if (sh.lo == sh.hi) L = sh.lo;
  }
  if (!L)
    throw Error(ErrorKind::hypothesis_violation,
                "g needs a declared limit at infinity to fix the regime");
  Regime r;
  r.g_infinity = *L;
  if (*L > 0.0) r.tag = Regime::Tag::g_positive_limit;
  else if (*L < 0.0) r.tag = Regime::Tag::g_negative_limit;
  else r.tag = Regime::Tag::g_zero_limit;
  return r;
}

ConditionReport condition_ns_plus(const Nonlinearity& f, const Nonlinearity& g,
                                  double q) {
  ConditionReport rep;
  rep.condition = Condition::ns_plus;
  const bool gplus_zero = identically_zero(sign_parts(g).plus);
  if (q > 1.0 && !gplus_zero) {
    rep.result.verdict = V::convergent;
    rep.result.diagnostic = "q > 1";
    rep.note = "q > 1 with g+ not identically 0: the condition fails, no probe";
    return rep;
  }
  rep.parts.push_back(keller_osserman_probe(f));
  if (gplus_zero) {
    rep.note = "g+ = 0: only the Keller-Osserman integral remains";
  } else {
    const auto gp = sign_parts(g).plus;
    const double t0 = first_positive_point(gp);
    const double e = 1.0 / (2.0 - q);
    IntegrandSpec s{[gp, e](double t) {
      const double v = std::pow(t * gp(t), e);
      return std::isinf(v) ? 0.0 : 1.0 / v;
    }};
    std::optional<Asymptote> hint;
    if (auto ga = positive_part_asymptote(g))
      if (auto tg = times(Asymptote::power_law(1.0), *ga)) hint = raise(*tg, -e);
    rep.parts.push_back(run_probe("1/(t g+)^(1/(2-q))", s, t0, hint));
  }
  rep.result = all_diverge(rep.parts);
  return rep;
}

ConditionReport condition_ns_zero(const Nonlinearity& f, const Nonlinearity& g,
                                  double q) {
  ConditionReport rep;
  rep.condition = Condition::ns_zero;
  const SignSplit split = sign_parts(g);
  const bool h_zero = identically_zero(split.minus);

  // (s0) sufficient and (n0) necessary companions share the first integral.
  const NamedProbe ko = keller_osserman_probe(f);
  NamedProbe s0_tail, n0_tail;
  if (h_zero) {
    s0_tail = zero_probe("(g-/f)^(1/q)", "g- = 0");
    n0_tail = zero_probe("(G-/F)^(1/q)", "g- = 0");
  } else {
    const double iq = 1.0 / q;
    IntegrandSpec s0{[f, gm = split.minus, iq](double t) {
      const double v = gm(t) / f(t);
      return v > 0.0 ? std::pow(v, iq) : 0.0;
    }};
    s0_tail = run_probe("(g-/f)^(1/q)", s0, 1.0, std::nullopt);
    auto F = std::make_shared<CumulativeIntegral>(antiderivative(f, 0.0));
    auto Gm = std::make_shared<CumulativeIntegral>(
        antiderivative(split.minus, 0.0));
    IntegrandSpec n0{[F, Gm, iq](double t) {
      const double num = (*Gm)(t), den = (*F)(t);
      if (std::isinf(den) || num == 0.0) return 0.0;
      return std::pow(num / den, iq);
    }};
    n0_tail = run_probe("(G-/F)^(1/q)", n0, 1.0, std::nullopt);
  }
  NamedProbe s0{"s0", any_diverges({ko, s0_tail})};
  NamedProbe n0{"n0", any_diverges({ko, n0_tail})};

  // The condition itself: psi_0^(-1/2) with the weight h.
  std::optional<Asymptote> hint;
  if (h_zero)
    if (auto F = integrated(f.asymptote())) hint = raise(*F, -0.5);
  auto psi = std::make_shared<RelaxedIntegral>(
      [f](double t) { return f(t); },
      [h = WeightH(f, g, q)](double t) { return h(t); }, 0.0);
  IntegrandSpec ns{[psi](double s) {
                     const double v = psi->at_offset(s);
                     return std::isinf(v) ? 0.0 : 1.0 / std::sqrt(v);
                   },
                   Singularity::inverse_sqrt};
  NamedProbe ns0 = run_probe("ns0", ns, 0.0, hint);

  rep.parts = {ko, s0_tail, n0_tail, s0, n0, ns0};
  rep.result = ns0.result;
  std::ostringstream note;
  if (s0.result.divergent()) {
    rep.result.verdict = V::divergent;
    note << "sufficient condition s0 holds";
    if (ns0.result.convergent()) note << "; ns0 probe disagrees (convergent)";
  } else if (n0.result.convergent()) {
    rep.result.verdict = V::convergent;
    note << "necessary condition n0 fails";
    if (ns0.result.divergent()) note << "; ns0 probe disagrees (divergent)";
  } else if (ns0.result.conclusive()) {
    note << "s0 fails or is open, n0 holds or is open: ns0 probe decides";
  } else {
    rep.result.verdict = V::inconclusive;
    note << "s0, n0 and the ns0 probe are all undecided";
  }
  rep.note = note.str();
  if (rep.result.divergent()) {
    rep.result.value = kInf;
    rep.result.abs_err = kInf;
  }
  return rep;
}

ConditionReport condition_ns_minus(const Nonlinearity& f,
                                   const Nonlinearity& /*g*/, double q) {
  ConditionReport rep;
  rep.condition = Condition::ns_minus;
  rep.parts.push_back(keller_osserman_probe(f));
  const double iq = 1.0 / q;
  IntegrandSpec s{[f, iq](double t) {
    const double v = std::pow(f(t), iq);
    return std::isinf(v) ? 0.0 : 1.0 / v;
  }};
  std::optional<Asymptote> hint;
  if (auto fa = f.asymptote()) hint = raise(*fa, -iq);
  rep.parts.push_back(run_probe("1/f^(1/q)", s, 1.0, hint));
  rep.result = any_diverges(rep.parts);
  return rep;
}

Verdict classify(const Nonlinearity& f, const Nonlinearity& g, double q,
                 const Operator& op) {
  if (!(q > 0.0 && q <= 2.0))
    throw Error(ErrorKind::hypothesis_violation, "q must lie in (0,2]");
  if (op.kind == Operator::Kind::p_plus_k && op.k < 1)
    throw Error(ErrorKind::invalid_k, "P+_k needs k >= 1");
  auto rf = verify_hypotheses(f, Profile::comparison, Role::f);
  if (!rf.passed())
    throw Error(ErrorKind::hypothesis_violation, "f: " + rf.summary());
  auto rg = verify_hypotheses(g, Profile::ode, Role::g);
  if (!rg.passed())
    throw Error(ErrorKind::hypothesis_violation, "g: " + rg.summary());

  Verdict v;
  v.op = op;
  v.regime = detect_regime(g);
  switch (v.regime.tag) {
    case Regime::Tag::g_positive_limit:
      v.condition = condition_ns_plus(f, g, q);
      break;
    case Regime::Tag::g_zero_limit:
      v.condition = condition_ns_zero(f, g, q);
      break;
    case Regime::Tag::g_negative_limit:
      v.condition = condition_ns_minus(f, g, q);
      break;
  }
  if (!v.condition.note.empty()) v.notes.push_back(v.condition.note);

  if (v.condition.holds()) v.exists_entire = Existence::yes;
  else if (v.condition.fails()) v.exists_entire = Existence::no;
  else v.exists_entire = Existence::inconclusive;

  if (op.kind == Operator::Kind::p_plus_k) {
    if (nonnegative_everywhere(g)) {
      v.notes.push_back(
          "g >= 0: radial solutions with c = k give the P+_k subsolutions");
    } else {
      v.characterization = false;
      v.notes.push_back(
          "g takes negative values: for P+_k only the necessary direction is "
          "known (P+_k <= M+_{0,1})");
      if (v.exists_entire == Existence::yes) {
        v.exists_entire = Existence::inconclusive;
        v.notes.push_back("condition holds, which is not sufficient here");
      }
    }
  }
  return v;
}

}  // namespace osserman
