// Command-line front end: classify, solve, bracket, barrier, bound-check,
// verify-radial and selftest on JSON problem files.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "osserman/barrier.hpp"
#include "osserman/classify.hpp"
#include "osserman/error.hpp"
#include "osserman/ode.hpp"
#include "osserman/parallel.hpp"
#include "osserman/pucci.hpp"
#include "osserman/spec_io.hpp"

namespace fs = std::filesystem;
using namespace osserman;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum Exit { kOk = 0, kParse = 2, kHypothesis = 3, kInconclusive = 4, kViolation = 5 };

struct Config {
  std::string command;
  std::string spec_path;
  std::string out_dir = ".";
  std::string a_grid;
  bool strict = false;
  std::uint64_t seed = 1;
  std::optional<double> r_max, phi_cap;
  std::string format = "csv";
  int points = 0;
};

struct Grid {
  double lo = 0.0, hi = 0.0;
  int n = 1;
};

Grid parse_grid(const std::string& text) {
  Grid g;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.n) || c1 != ':' || c2 != ':' ||
      !is.eof() || g.n < 1 || (g.n > 1 && !(g.hi > g.lo)))
    throw Error(ErrorKind::parse, "--a-grid expects lo:hi:n, got " + text);
  return g;
}

std::vector<double> grid_values(const Grid& g) {
  std::vector<double> v;
  for (int i = 0; i < g.n; ++i)
    v.push_back(g.n == 1 ? g.lo : g.lo + (g.hi - g.lo) * i / (g.n - 1));
  return v;
}

std::ofstream open_out(const Config& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  const fs::path p = fs::path(cfg.out_dir) / name;
  std::ofstream os(p);
  if (!os) throw Error(ErrorKind::parse, "cannot write " + p.string());
  return os;
}

RunSpec load(const Config& cfg) {
  RunSpec rs = parse_spec_file(cfg.spec_path);
  if (cfg.r_max) rs.problem.tol.r_max = *cfg.r_max;
  if (cfg.phi_cap) rs.problem.tol.phi_cap = *cfg.phi_cap;
  rs.problem.validate();
  return rs;
}

const Regime& need_regime(const RunSpec& rs) {
  if (!rs.regime)
    throw Error(ErrorKind::hypothesis_violation,
                "g needs a declared limit at infinity (declared.g_limit)");
  return *rs.regime;
}

std::string phrase(const Verdict& v) {
  switch (v.exists_entire) {
    case Existence::yes: return "entire subsolutions exist";
    case Existence::inconclusive: return "existence inconclusive";
    case Existence::no: break;
  }
  if (v.condition.condition == Condition::ns_plus && v.condition.parts.empty())
    return "no entire subsolution (q > 1)";
  return std::string("no entire subsolution (") + to_string(v.condition.condition) +
         " fails)";
}

int cmd_classify(const Config& cfg) {
  const RunSpec rs = load(cfg);
  const Verdict v = classify(rs.problem.f, rs.problem.g, rs.problem.q, rs.op);
  std::cout << phrase(v) << '\n'
            << "operator: " << v.op.to_string() << '\n'
            << "regime: " << to_string(v.regime.tag)
            << " (g_inf = " << v.regime.g_infinity << ")\n"
            << "condition: " << to_string(v.condition.condition) << " "
            << to_string(v.condition.result.verdict) << '\n';
  for (const auto& p : v.condition.parts)
    std::cout << "  " << p.name << ": " << to_string(p.result.verdict) << " ("
              << p.result.diagnostic << ")\n";
  if (!v.condition.note.empty()) std::cout << "note: " << v.condition.note << '\n';
  std::cout << "exists_entire: " << to_string(v.exists_entire) << '\n'
            << "characterization: " << (v.characterization ? "true" : "false")
            << '\n';
  for (const auto& n : v.notes)
    if (n != v.condition.note) std::cout << "note: " << n << '\n';

  auto os = open_out(cfg, "verdict.csv");
  os << "operator,regime,g_infinity,condition,condition_result,exists_entire,"
        "characterization\n"
     << v.op.to_string() << ',' << to_string(v.regime.tag) << ','
     << format_number(v.regime.g_infinity) << ','
     << to_string(v.condition.condition) << ','
     << to_string(v.condition.result.verdict) << ','
     << to_string(v.exists_entire) << ','
     << (v.characterization ? "true" : "false") << '\n';
  return cfg.strict && v.exists_entire == Existence::inconclusive
             ? kInconclusive
             : kOk;
}

std::vector<double> a_values(const Config& cfg, const RunSpec& rs) {
  if (cfg.a_grid.empty()) return {rs.problem.a};
  return grid_values(parse_grid(cfg.a_grid));
}

std::vector<SolveOutcome> solve_all(const RunSpec& rs,
                                    const std::vector<double>& as) {
  std::vector<std::optional<SolveOutcome>> out(as.size());
  parallel_for(as.size(), worker_count(), [&](std::size_t i) {
    ProblemSpec s = rs.problem;
    s.a = as[i];
    out[i] = solve_radial(s);
  });
  std::vector<SolveOutcome> res;
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

void write_status_row(std::ostream& os, double a, const SolveOutcome& o) {
  const auto& tr = o.trajectory;
  os << format_number(a) << ',' << to_string(o.status) << ',' << o.stop_reason
     << ',' << format_number(tr.r_end()) << ','
     << format_number(tr.a() + tr.samples().back().u) << ','
     << format_number(o.bracket ? o.bracket->low : kInf) << ','
     << format_number(o.bracket ? o.bracket->high : kInf) << ','
     << (o.certified_blowup() ? "true" : "false") << '\n';
}

int cmd_solve(const Config& cfg) {
  const RunSpec rs = load(cfg);
  const auto as = a_values(cfg, rs);
  const auto outs = solve_all(rs, as);
  auto st = open_out(cfg, "status.csv");
  st << "a,status,stop_reason,r_end,phi_end,low,high,certified\n";
  bool uncertain = false;
  for (std::size_t i = 0; i < as.size(); ++i) {
    ProblemSpec s = rs.problem;
    s.a = as[i];
    const std::string name =
        as.size() == 1 ? "trajectory.csv"
                       : "trajectory_" + std::to_string(i) + ".csv";
    auto os = open_out(cfg, name);
    write_trajectory_csv(os, outs[i].trajectory, s);
    write_status_row(st, as[i], outs[i]);
    const auto& tr = outs[i].trajectory;
    std::cout << "a = " << format_number(as[i]) << ": "
              << to_string(outs[i].status) << " (" << outs[i].stop_reason
              << "), r_end = " << format_number(tr.r_end())
              << ", phi(r_end) = "
              << format_number(tr.a() + tr.samples().back().u) << " -> "
              << name << '\n';
    uncertain = uncertain || (outs[i].status == SolveOutcome::Status::blowup &&
                              !outs[i].certified_blowup());
  }
  return cfg.strict && uncertain ? kInconclusive : kOk;
}

int cmd_bracket(const Config& cfg) {
  const RunSpec rs = load(cfg);
  const auto as = a_values(cfg, rs);
  const auto outs = solve_all(rs, as);
  auto os = open_out(cfg, "bracket.csv");
  os << "a,low,high,width,certified\n";
  bool uncertain = false;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const auto& o = outs[i];
    if (!o.bracket) {
      std::cout << "a = " << format_number(as[i])
                << ": no blow-up up to r = " << format_number(o.trajectory.r_end())
                << '\n';
      os << format_number(as[i]) << ",inf,inf,inf,false\n";
      uncertain = true;
      continue;
    }
    const auto& b = *o.bracket;
    std::cout << "a = " << format_number(as[i]) << ": blow-up radius in ["
              << format_number(b.low) << ", " << format_number(b.high) << "]"
              << (b.certified() ? "" : " (tail not certified)") << '\n';
    os << format_number(as[i]) << ',' << format_number(b.low) << ','
       << format_number(b.high) << ',' << format_number(b.high - b.low) << ','
       << (b.certified() ? "true" : "false") << '\n';
    uncertain = uncertain || !b.certified();
  }
  return cfg.strict && uncertain ? kInconclusive : kOk;
}

BarrierTable build_table(const Config& cfg, const RunSpec& rs) {
  const Grid g = parse_grid(cfg.a_grid.empty() ? "-2:6:9" : cfg.a_grid);
  if (g.n < 2) throw Error(ErrorKind::parse, "barrier grids need n >= 2");
  BarrierProblem p(rs.problem.f, rs.problem.g, rs.problem.q, rs.dimension,
                   need_regime(rs));
  return tabulate(p, g.lo, g.hi, g.n, worker_count());
}

int cmd_barrier(const Config& cfg) {
  const RunSpec rs = load(cfg);
  const BarrierTable t = build_table(cfg, rs);
  auto os = open_out(cfg, "barrier.csv");
  write_table_csv(os, t);
  std::cout << "barrier table (" << to_string(t.problem().regime.tag)
            << ", n = " << rs.dimension << "): "
            << (t.infinite() ? "R = +inf everywhere" : "finite") << " -> barrier.csv\n";
  for (std::size_t i = 0; i < t.a().size(); ++i)
    std::cout << "  R(" << format_number(t.a()[i])
              << ") = " << format_number(t.values()[i]) << '\n';
  for (const auto& d : t.diagnostics()) std::cout << "note: " << d << '\n';
  return kOk;
}

std::vector<std::vector<double>> probe_points(const DomainShape& s, int count) {
  std::vector<std::vector<double>> pts;
  const std::size_t n = s.dim();
  for (int i = 0; i < count; ++i) {
    const double u = double(i) / count;
    std::vector<double> x(n, 0.0);
    switch (s.kind()) {
      case DomainShape::Kind::ball:
        x = s.p();
        x[0] += u * s.scalar();
        break;
      case DomainShape::Kind::box:
        for (std::size_t j = 0; j < n; ++j) x[j] = 0.5 * (s.p()[j] + s.q()[j]);
        x[0] = s.p()[0] + u * (s.q()[0] - s.p()[0]);
        break;
      case DomainShape::Kind::half_space: {
        double nn = 0.0;
        for (double v : s.p()) nn += v * v;
        for (std::size_t j = 0; j < n; ++j)
          x[j] = s.p()[j] * (s.scalar() / nn + 10.0 * u / std::sqrt(nn));
        break;
      }
    }
    pts.push_back(x);
  }
  return pts;
}

int cmd_bound_check(const Config& cfg) {
  const RunSpec rs = load(cfg);
  if (!rs.domain) throw Error(ErrorKind::parse, "bound-check needs a domain");
  const BarrierTable t = build_table(cfg, rs);
  const double t0 = threshold_t0(rs.problem.g);
  const auto pts = probe_points(*rs.domain, cfg.points > 0 ? cfg.points : 50);
  {
    auto os = open_out(cfg, "bounds.csv");
    write_bound_csv(os, t, *rs.domain, t0, pts);
  }
  std::cout << "bound map on " << rs.domain->to_string() << " -> bounds.csv\n";

  // The radial solution from a, on the ball of radius R_low, must lie below
  // R^{-1}(R_low - r).
  ProblemSpec s = rs.problem;
  s.c = rs.dimension;
  const SolveOutcome o = solve_radial(s);
  if (!o.certified_blowup()) {
    std::cout << "radial check skipped: no certified blow-up from a = "
              << format_number(s.a) << '\n';
    return cfg.strict ? kInconclusive : kOk;
  }
  const double R_low = o.bracket->low;
  std::vector<double> center(rs.dimension, 0.0);
  const auto ball = DomainShape::ball(center, R_low);
  std::vector<FieldSample> samples;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x = center;
    x[0] = R_low * i / 100.0;
    samples.push_back({x, o.trajectory.a() + o.trajectory.at(x[0]).u});
  }
  const BoundReport rep = compare_with_radial(samples, t, ball, t0);
  auto os = open_out(cfg, "radial_bound.csv");
  os << "r,phi,bound\n";
  for (const auto& smp : samples)
    os << format_number(smp.x[0]) << ',' << format_number(smp.u) << ','
       << format_number(upper_bound(t, ball, t0, smp.x)) << '\n';
  std::cout << "radial check on ball(0, " << format_number(R_low)
            << "): " << (rep.passed() ? "PASS" : "FAIL") << " (" << rep.summary()
            << ") -> radial_bound.csv\n";
  return rep.passed() ? kOk : kViolation;
}

int cmd_verify_radial(const Config& cfg) {
  const RunSpec rs = load(cfg);
  const SolveOutcome o = solve_radial(rs.problem);
  RadialLift lift(std::vector<double>(rs.dimension, 0.0),
                  std::make_shared<const Trajectory>(o.trajectory));
  const int n_points = cfg.points > 0 ? cfg.points : 200;
  const auto rep =
      verify_radial_solution(lift, rs.problem, rs.op, n_points, cfg.seed);
  const bool ok = rep.max_residual <= 1e-6 && rep.operators_agree();
  auto os = open_out(cfg, "verify.csv");
  os << "operator,dimension,c,points,max_residual,max_abs_residual,"
        "max_residual_generic,max_operator_gap,worst_radius\n"
     << rs.op.to_string() << ',' << rs.dimension << ','
     << format_number(rs.problem.c) << ',' << rep.points << ','
     << format_number(rep.max_residual) << ','
     << format_number(rep.max_abs_residual) << ','
     << format_number(rep.max_residual_generic) << ','
     << format_number(rep.max_operator_gap) << ','
     << format_number(rep.worst_radius) << '\n';
  std::cout << (ok ? "PASS" : "FAIL") << ": " << rep.summary() << '\n';
  return ok ? kOk : kViolation;
}

int cmd_selftest(const Config& cfg) {
  int failures = 0;
  auto report = [&failures](const std::string& name, bool ok,
                            const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    if (!ok) ++failures;
  };
  const Expr t = Expr::identity();
  const double pi = std::acos(-1.0);

  {
    ProblemSpec s{Nonlinearity(Expr::constant(1)), Nonlinearity(Expr::constant(0)),
                  1, 3, 0};
    s.tol.r_max = 10;
    const auto o = solve_radial(s);
    double worst = 0.0;
    for (const auto& p : o.trajectory.samples())
      if (p.r > 0) worst = std::max(worst, std::abs(p.u * 6 / (p.r * p.r) - 1));
    report("exact solution", worst <= 1e-8,
           "max relative error " + format_number(worst));
    const auto st = structural_check(o, s);
    const auto sw = sandwich_check(o, s);
    report("gradient bounds", st.passed() && sw.passed(),
           st.summary() + "; " + sw.summary());
  }
  {
    ProblemSpec s{Nonlinearity(Expr::exp(t)), Nonlinearity(Expr::constant(0)), 1,
                  1, 0};
    const auto o = solve_radial(s);
    const double R = pi / std::sqrt(2.0);
    const bool ok = o.certified_blowup() && o.bracket->low <= R &&
                    R <= o.bracket->high && o.bracket->high - o.bracket->low <= 1e-3;
    report("blow-up bracket", ok,
           o.bracket ? "[" + format_number(o.bracket->low) + ", " +
                           format_number(o.bracket->high) + "]"
                     : "no bracket");
  }
  {
    BarrierProblem p(Nonlinearity(Expr::exp(t), {}, kInf,
                                  GrowthClass::exponential()),
                     Nonlinearity(Expr::constant(0)), 2, 2,
                     {Regime::Tag::g_zero_limit, 0.0});
    const auto tab = tabulate(p, 0, 2, 2, worker_count());
    const bool ok = std::abs(tab.values()[0] - pi) <= 1e-8 * pi &&
                    std::abs(invert(tab, 1.0) - 2 * std::log(pi)) <= 1e-8;
    report("barrier closed form", ok,
           "R(0) = " + format_number(tab.values()[0]));
  }
  for (const auto& op : {Operator::m_plus_01(), Operator::p_plus_k(1),
                         Operator::p_plus_k(2)}) {
    const auto rep = ellipticity_check(op, 1000, cfg.seed);
    report("ellipticity " + op.to_string(), rep.passed(), rep.summary());
  }
  {
    ProblemSpec s{Nonlinearity(Expr::exp(t)), Nonlinearity(Expr::constant(1)), 1,
                  2, 0};
    const auto o = solve_radial(s);
    RadialLift lift({0, 0, 0, 0}, std::make_shared<const Trajectory>(o.trajectory));
    const auto rep = verify_radial_solution(lift, s, Operator::p_plus_k(2), 200,
                                            cfg.seed);
    report("radial lift P+_2", rep.max_residual <= 1e-6 && rep.operators_agree(),
           rep.summary());
  }
  {
    const auto v = classify(Nonlinearity(Expr::exp(t)),
                            Nonlinearity(Expr::constant(1)), 1.5,
                            Operator::m_plus_01());
    report("classifier", v.exists_entire == Existence::no, phrase(v));
  }
  return failures == 0 ? kOk : kViolation;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::parse:
    case ErrorKind::out_of_range: return kParse;
    case ErrorKind::hypothesis_violation:
    case ErrorKind::invalid_k:
    case ErrorKind::outside_domain: return kHypothesis;
    case ErrorKind::inconclusive:
    case ErrorKind::step_underflow:
    case ErrorKind::non_finite:
    case ErrorKind::conflicting_evidence: return kInconclusive;
    case ErrorKind::monotonicity_violation: return kViolation;
  }
  return kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "osserman-lab: entire subsolutions, radial blow-up and universal bounds "
      "for F(D^2u) >= f(u) + g(u)|Du|^q.\n\n"
      "Exit codes: 0 success, 2 parse error, 3 hypothesis violation, "
      "4 inconclusive (with --strict) or numerical failure, 5 property "
      "violation.\n\n"
      "CSV outputs (17 significant digits):\n"
      "  verdict.csv       operator,regime,g_infinity,condition,condition_result,"
      "exists_entire,characterization\n"
      "  trajectory*.csv   r,phi,dphi,ddphi,residual\n"
      "  status.csv        a,status,stop_reason,r_end,phi_end,low,high,certified\n"
      "  bracket.csv       a,low,high,width,certified\n"
      "  barrier.csv       a,R_of_a,err\n"
      "  bounds.csv        x0,...,d,bound\n"
      "  radial_bound.csv  r,phi,bound\n"
      "  verify.csv        operator,dimension,c,points,max_residual,"
      "max_abs_residual,max_residual_generic,max_operator_gap,worst_radius\n\n"
      "OSSERMAN_LAB_THREADS caps the worker pool used by parameter sweeps."};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&cfg](CLI::App* sub, bool needs_spec) {
    auto* spec = sub->add_option("--spec", cfg.spec_path, "JSON problem file");
    if (needs_spec) spec->required()->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.out_dir, "Output directory")
        ->capture_default_str();
    sub->add_option("--a-grid", cfg.a_grid, "Sweep of a values, lo:hi:n");
    sub->add_flag("--strict", cfg.strict, "Exit 4 on inconclusive outcomes");
    sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--r-max", cfg.r_max, "Override the radius limit");
    sub->add_option("--phi-cap", cfg.phi_cap, "Override the blow-up cap");
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"csv"}))
        ->capture_default_str();
    sub->add_option("--points", cfg.points, "Sample points (bound-check, verify-radial)");
  };
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const Config&);
  };
  const Cmd cmds[] = {
      {"classify", "Existence of entire subsolutions", cmd_classify},
      {"solve", "Radial Cauchy problem, trajectory CSV", cmd_solve},
      {"bracket", "Blow-up radius interval", cmd_bracket},
      {"barrier", "Universal barrier table", cmd_barrier},
      {"bound-check", "Pointwise bound map and radial self-check", cmd_bound_check},
      {"verify-radial", "PDE residual of the radial lift", cmd_verify_radial},
      {"selftest", "Built-in invariant suite", cmd_selftest},
  };
  int (*run)(const Config&) = nullptr;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, std::string(c.name) != "selftest");
    sub->callback([&run, &cfg, c]() {
      run = c.run;
      cfg.command = c.name;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }
  try {
    return run(cfg);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kViolation;
  }
}
