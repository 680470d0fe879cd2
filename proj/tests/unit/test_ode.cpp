#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "osserman/bounds.hpp"
#include "osserman/error.hpp"
#include "osserman/ode.hpp"

using namespace osserman;

namespace {

const Expr t = Expr::identity();
const double kPi = 3.14159265358979323846;

ProblemSpec make(Expr f, Expr g, double q, double c, double a) {
  return ProblemSpec{Nonlinearity(std::move(f)), Nonlinearity(std::move(g)), q,
                     c, a};
}

double exp_radius(double a) { return kPi / std::sqrt(2.0) * std::exp(-a / 2.0); }

}  // namespace

TEST_CASE("ode: taylor start") {
  auto s = make(Expr::constant(1), Expr::constant(0), 1, 3, 0);
  auto st = taylor_start(s, 0.01);
  CHECK(st.r == 0.01);
  CHECK(st.u == doctest::Approx(1.6667e-5).epsilon(1e-4));
  CHECK(st.dphi == doctest::Approx(3.3333e-3).epsilon(1e-4));

  auto e = make(Expr::exp(t), Expr::constant(0), 1, 1, 0);
  CHECK(taylor_start(e, 1e-3).dphi == doctest::Approx(1e-3).epsilon(1e-14));

  auto w = make(Expr::softplus(t), Expr::constant(0), 1, 2.5, 0.7);
  const double target = std::log1p(std::exp(0.7)) / 2.5;
  for (double h : {1e-2, 1e-4, 1e-6})
    CHECK(taylor_start(w, h).dphi / h == doctest::Approx(target).epsilon(1e-14));
  CHECK(taylor_start(w).r == doctest::Approx(1e-6));
  CHECK_THROWS_AS(taylor_start(w, 0.0), Error);
}

TEST_CASE("ode: exact quadratic solution") {
  for (double k : {0.5, 1.0, 3.0}) {
    for (double c : {1.0, 3.0, 5.5}) {
      auto s = make(Expr::constant(k), Expr::constant(0), 1, c, -0.4);
      s.tol.r_max = 10.0;
      auto out = solve_radial(s);
      REQUIRE(out.status == SolveOutcome::Status::global);
      CHECK(out.stop_reason == "r_max");
      double worst = 0.0;
      for (const auto& p : out.trajectory.samples()) {
        if (p.r == 0.0) continue;
        const double exact = k * p.r * p.r / (2.0 * c);
        worst = std::max(worst, std::abs(p.u - exact) / exact);
      }
      CHECK(worst <= 1e-8);
      CHECK(out.trajectory.a() + out.trajectory.at(1.0).u ==
            doctest::Approx(-0.4 + k / (2.0 * c)).epsilon(1e-10));
    }
  }
  auto s = make(Expr::constant(1), Expr::constant(0), 1, 3, 0);
  auto out = solve_radial(s);
  CHECK(out.trajectory.at(1.0).u == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("ode: exponential blow-up brackets") {
  for (double a : {-1.0, 0.0, 1.0, 2.0}) {
    auto s = make(Expr::exp(t), Expr::constant(0), 1, 1, a);
    auto out = solve_radial(s);
    REQUIRE(out.status == SolveOutcome::Status::blowup);
    REQUIRE(out.certified_blowup());
    const auto& b = *out.bracket;
    INFO("a = " << a << " bracket [" << b.low << ", " << b.high << "] "
                << b.diagnostic);
    CHECK(b.low < b.high);
    CHECK(b.low <= exp_radius(a));
    CHECK(exp_radius(a) <= b.high);
    CHECK(b.high - b.low <= 1e-3);
  }
}

TEST_CASE("ode: blow-up radius decreases with a") {
  double prev = 1e300;
  for (double a : {-3.0, -1.5, 0.0, 0.5, 1.0, 2.5, 4.0}) {
    auto s = make(Expr::softplus(Expr::power(Expr::softplus(t), 2.0)),
                  Expr::constant(0.5), 1.2, 2, a);
    auto out = solve_radial(s);
    REQUIRE(out.certified_blowup());
    CHECK(out.bracket->low <= prev);
    prev = out.bracket->high;
  }
}

TEST_CASE("ode: bracket from an artificial state") {
  auto s = make(Expr::exp(t), Expr::constant(0), 2, 1, 0);
  auto b = blowup_bracket(s, {2.0, 30.0, std::sqrt(2.0 * (std::exp(30.0) - 1))});
  CHECK(b.low == 2.0);
  CHECK(b.high > b.low);
  CHECK(b.high - b.low < 1e-5);
  CHECK(b.certified());
}

TEST_CASE("ode: global run never certifies blow-up") {
  auto s = make(Expr::constant(1), Expr::constant(0), 1, 1, 0);
  auto out = solve_radial(s);
  CHECK(out.status == SolveOutcome::Status::global);
  CHECK_FALSE(out.bracket.has_value());
  CHECK_FALSE(out.certified_blowup());
}

TEST_CASE("ode: structural checks") {
  SUBCASE("constant source") {
    auto s = make(Expr::constant(1), Expr::constant(0), 1, 3, 0);
    auto out = solve_radial(s);
    auto rep = structural_check(out, s);
    CHECK(rep.passed());
    CHECK(rep.checked.size() == 4);
    CHECK(rep.worst_relative <= 1e-12);
  }
  SUBCASE("gradient cap") {
    auto s = make(Expr::exp(t), Expr::constant(-1), 2, 2, 0);
    auto out = solve_radial(s);
    auto rep = structural_check(out, s);
    INFO(rep.summary());
    CHECK(rep.passed());
    CHECK(std::find(rep.checked.begin(), rep.checked.end(), "gradient_cap") !=
          rep.checked.end());
    for (const auto& p : out.trajectory.samples())
      CHECK(p.dphi <= std::exp(p.u / 2.0) * (1.0 + 1e-6));
  }
  SUBCASE("r phi'' >= phi'") {
    auto s = make(Expr::exp(t), Expr::constant(1), 1, 3, 0);
    auto out = solve_radial(s);
    auto rep = structural_check(out, s);
    INFO(rep.summary());
    CHECK(rep.passed());
    CHECK(std::find(rep.checked.begin(), rep.checked.end(), "r_phi2_ge_phi1") !=
          rep.checked.end());
  }
  SUBCASE("violations are reported") {
    auto s = make(Expr::constant(1), Expr::constant(0), 1, 3, 0);
    auto out = solve_radial(s);
    std::vector<Sample> bad = out.trajectory.samples();
    bad[10].ddphi = -1.0;
    SolveOutcome broken = out;
    broken.trajectory = Trajectory(0.0, bad);
    auto rep = structural_check(broken, s);
    CHECK_FALSE(rep.passed());
    CHECK(rep.violations.front().inequality == "convex");
  }
}

TEST_CASE("ode: sandwich checks") {
  SUBCASE("constant source closed forms") {
    auto s = make(Expr::constant(1), Expr::constant(0), 1, 3, 0);
    auto out = solve_radial(s);
    auto rep = sandwich_check(out, s);
    INFO(rep.summary());
    CHECK(rep.passed());
    CHECK(rep.checked.size() == 8);
  }
  SUBCASE("exponential source contains the blow-up radius") {
    auto s = make(Expr::exp(t), Expr::constant(0), 1, 1, 0);
    auto out = solve_radial(s);
    auto rep = sandwich_check(out, s);
    INFO(rep.summary());
    CHECK(rep.passed());
    BoundFamily B(s.f, s.g, s.q, s.c, s.a);
    const double far = 700.0;
    auto lo = reciprocal_integrals([&B](double x) { return B.upper_plus(x); },
                                   std::vector<double>{far});
    auto hi = reciprocal_integrals([&B](double x) { return B.lower_plus(x); },
                                   std::vector<double>{far});
    CHECK(lo[0] <= exp_radius(0));
    CHECK(exp_radius(0) <= hi[0]);
  }
  SUBCASE("absorbing gradient term") {
    auto s = make(Expr::exp(t), Expr::constant(-1), 2, 1, 0);
    auto out = solve_radial(s);
    auto rep = sandwich_check(out, s);
    INFO(rep.summary());
    CHECK(rep.passed());
    CHECK(rep.checked.size() == 6);
  }
  SUBCASE("sign-changing g") {
    auto s = make(Expr::exp(t), t, 1.5, 2, -1);
    auto out = solve_radial(s);
    auto rep = sandwich_check(out, s);
    INFO(rep.summary());
    CHECK(rep.passed());
    CHECK(rep.checked.size() == 4);
  }
}

TEST_CASE("ode: errors") {
  auto bad_q = make(Expr::constant(1), Expr::constant(0), 2.5, 1, 0);
  CHECK_THROWS_AS(solve_radial(bad_q), Error);
  auto bad_c = make(Expr::constant(1), Expr::constant(0), 1, 0.5, 0);
  CHECK_THROWS_AS(solve_radial(bad_c), Error);
  auto dec = make(Expr::exp(Expr::affine(-1, 0, t)), Expr::constant(0), 1, 1, 0);
  try {
    solve_radial(dec);
    FAIL("expected a hypothesis violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::hypothesis_violation);
  }
}

TEST_CASE("ode: stiff gradient relaxation") {
  // g = -1, q = 2, f ~ t^2: phi' relaxes to ~ sqrt(f) at a rate that grows
  // with phi; the solution is global and only crosses the cap.
  auto s = make(Expr::power(Expr::softplus(t), 2), Expr::constant(-1), 2, 3, 0);
  auto out = solve_radial(s);
  CHECK(out.status == SolveOutcome::Status::blowup);
  CHECK(out.stop_reason == "phi_cap");
  CHECK_FALSE(out.certified_blowup());
  CHECK(out.trajectory.samples().size() < 20000);
  CHECK(structural_check(out, s).passed());
  auto rep = sandwich_check(out, s);
  INFO(rep.summary());
  CHECK(rep.passed());
  auto fine = s;
  fine.tol.step_rel = 1e-11;
  auto ref = solve_radial(fine);
  for (double u : {10.0, 1e3, 1e6, 1e9}) {
    CHECK(out.trajectory.radius_at_offset(u) ==
          doctest::Approx(ref.trajectory.radius_at_offset(u)).epsilon(1e-7));
  }
}

TEST_CASE("ode: trajectory interpolation and csv") {
  auto s = make(Expr::constant(2), Expr::constant(0), 1, 2, 1);
  s.tol.r_max = 3.0;
  auto out = solve_radial(s);
  const auto& tr = out.trajectory;
  for (double r : {0.0, 0.3, 1.7, 3.0}) {
    auto p = tr.at(r);
    CHECK(p.u == doctest::Approx(r * r / 2.0).epsilon(1e-9));
    CHECK(p.dphi == doctest::Approx(r).epsilon(1e-9));
    CHECK(p.ddphi == doctest::Approx(1.0).epsilon(1e-7));
  }
  CHECK_THROWS_AS(tr.at(3.5), Error);
  CHECK(tr.radius_at_offset(2.0) == doctest::Approx(2.0).epsilon(1e-9));

  std::ostringstream os;
  write_trajectory_csv(os, tr, s);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "r,phi,dphi,ddphi,residual");
  std::size_t rows = 0;
  double worst = 0.0;
  while (std::getline(is, line)) {
    ++rows;
    auto last = line.rfind(',');
    worst = std::max(worst, std::abs(std::stod(line.substr(last + 1))));
  }
  CHECK(rows == tr.samples().size());
  CHECK(worst < 1e-9);
}
