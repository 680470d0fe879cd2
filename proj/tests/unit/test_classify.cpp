#include <doctest.h>

#include <cmath>
#include <limits>

#include "osserman/classify.hpp"
#include "osserman/error.hpp"

using namespace osserman;

namespace {

const Expr t = Expr::identity();
constexpr double kInf = std::numeric_limits<double>::infinity();

Nonlinearity softplus_f() {
  return Nonlinearity(Expr::softplus(t), {}, kInf, GrowthClass::power(1.0));
}
Nonlinearity exp_f() {
  return Nonlinearity(Expr::exp(t), {}, kInf, GrowthClass::exponential());
}
Nonlinearity constant(double k) {
  return Nonlinearity(Expr::constant(k), {}, k, GrowthClass::bounded());
}

}  // namespace

TEST_CASE("classify: regimes") {
  CHECK(detect_regime(constant(1)).tag == Regime::Tag::g_positive_limit);
  CHECK(detect_regime(constant(-1)).tag == Regime::Tag::g_negative_limit);
  Nonlinearity decay(Expr::scale(-1, Expr::exp(Expr::affine(-1, 0, t))), {},
                     0.0);
  CHECK(detect_regime(decay).tag == Regime::Tag::g_zero_limit);
  Nonlinearity grow(Expr::softplus(t), {}, kInf);
  auto r = detect_regime(grow);
  CHECK(r.tag == Regime::Tag::g_positive_limit);
  CHECK(std::isinf(r.g_infinity));
  // Undeclared non-constant limit.
  CHECK_THROWS_AS(detect_regime(Nonlinearity(Expr::softplus(t))), Error);
  // Constants need no declaration.
  CHECK(detect_regime(Nonlinearity(Expr::constant(-2))).tag ==
        Regime::Tag::g_negative_limit);
}

TEST_CASE("classify: ns+") {
  auto big_q = condition_ns_plus(exp_f(), constant(1), 1.5);
  CHECK(big_q.fails());
  CHECK(big_q.parts.empty());

  auto holds = condition_ns_plus(softplus_f(), constant(1), 0.5);
  CHECK(holds.holds());
  REQUIRE(holds.parts.size() == 2);
  CHECK(holds.parts[0].result.divergent());
  CHECK(holds.parts[1].result.divergent());

  Nonlinearity g_sp(Expr::softplus(t), {}, kInf, GrowthClass::power(1.0));
  auto fails = condition_ns_plus(softplus_f(), g_sp, 1.0);
  CHECK(fails.fails());
  CHECK(fails.parts[0].result.divergent());
  CHECK(fails.parts[1].result.convergent());

  // Logarithmic growth of g is still allowed for q = 1.
  Nonlinearity g_log(Expr::log_power(1.0, t), {}, kInf,
                     GrowthClass::log_power(1.0));
  CHECK(condition_ns_plus(softplus_f(), g_log, 1.0).holds());

  // Without declared growth the numeric probes decide alone.
  Nonlinearity f_plain(Expr::softplus(t));
  CHECK(condition_ns_plus(f_plain, constant(1), 0.5).holds());
}

TEST_CASE("classify: ns0") {
  auto e = condition_ns_zero(exp_f(), constant(0), 1);
  CHECK(e.fails());
  REQUIRE(e.parts.size() == 6);
  CHECK(e.parts.back().name == "ns0");
  CHECK(e.parts.back().result.convergent());

  CHECK(condition_ns_zero(softplus_f(), constant(0), 1).holds());
  Nonlinearity one(Expr::constant(1), {}, 1.0, GrowthClass::bounded());
  CHECK(condition_ns_zero(one, constant(0), 1).holds());

  // Numeric value of the classical integral with f = exp: pi.
  Nonlinearity e_plain(Expr::exp(t));
  auto v = condition_ns_zero(e_plain, constant(0), 2);
  CHECK(v.fails());
  CHECK(v.parts.back().result.value == doctest::Approx(M_PI).epsilon(1e-6));

  // A decaying negative g does not rescue an exponential f.
  Nonlinearity decay(Expr::scale(-1, Expr::exp(Expr::affine(-1, 0, t))), {},
                     0.0);
  CHECK(condition_ns_zero(exp_f(), decay, 1).fails());
  CHECK(condition_ns_zero(softplus_f(), decay, 1).holds());
}

TEST_CASE("classify: ns-") {
  CHECK(condition_ns_minus(exp_f(), constant(-1), 2).fails());
  Nonlinearity sq(Expr::power(Expr::softplus(t), 2), {}, kInf,
                  GrowthClass::power(2.0));
  auto r = condition_ns_minus(sq, constant(-1), 2);
  CHECK(r.holds());
  CHECK(r.parts[0].result.convergent());
  CHECK(r.parts[1].result.divergent());
  CHECK(condition_ns_minus(softplus_f(), constant(-1), 1).holds());
  Nonlinearity cube(Expr::power(Expr::softplus(t), 3), {}, kInf,
                    GrowthClass::power(3.0));
  CHECK(condition_ns_minus(cube, constant(-1), 2).fails());
}

TEST_CASE("classify: verdicts") {
  auto a = classify(exp_f(), constant(0), 1, Operator::m_plus_01());
  CHECK(a.exists_entire == Existence::no);
  CHECK(a.condition.condition == Condition::ns_zero);

  auto b = classify(softplus_f(), constant(1), 0.5, Operator::p_plus_k(2));
  CHECK(b.exists_entire == Existence::yes);
  CHECK(b.characterization);
  CHECK(b.regime.tag == Regime::Tag::g_positive_limit);

  auto c = classify(exp_f(), constant(1), 1.5, Operator::m_plus_01());
  CHECK(c.exists_entire == Existence::no);
  CHECK(c.condition.parts.empty());

  // q > 1 with a positive limit: no regardless of f.
  auto d = classify(softplus_f(), constant(0.5), 1.2, Operator::m_plus_01());
  CHECK(d.exists_entire == Existence::no);
}

TEST_CASE("classify: P+_k with sign-changing g") {
  Nonlinearity g(t, {}, kInf, GrowthClass::power(1.0));
  auto holds_nec =
      classify(softplus_f(), constant(-1), 1, Operator::p_plus_k(1));
  CHECK_FALSE(holds_nec.characterization);
  CHECK(holds_nec.condition.holds());
  CHECK(holds_nec.exists_entire == Existence::inconclusive);
  auto fails = classify(exp_f(), constant(-1), 2, Operator::p_plus_k(2));
  CHECK_FALSE(fails.characterization);
  CHECK(fails.exists_entire == Existence::no);
  CHECK(classify(exp_f(), g, 0.5, Operator::p_plus_k(1)).characterization ==
        false);
}

TEST_CASE("classify: g = 0 paths agree") {
  Nonlinearity sq(Expr::power(Expr::softplus(t), 2), {}, kInf,
                  GrowthClass::power(2.0));
  Nonlinearity lin(Expr::sum({t, Expr::softplus(t)}), {}, kInf,
                   GrowthClass::power(1.0));
  for (const auto& f : {exp_f(), softplus_f(), sq, lin}) {
    for (double q : {0.5, 1.0, 2.0}) {
      auto plus = condition_ns_plus(f, constant(0), q);
      auto zero = condition_ns_zero(f, constant(0), q);
      CHECK(plus.result.verdict == zero.result.verdict);
      CHECK(plus.parts[0].result.verdict == zero.result.verdict);
    }
  }
}

TEST_CASE("classify: hypotheses") {
  CHECK_THROWS_AS(classify(constant(1), constant(0), 1, Operator::m_plus_01()),
                  Error);
  CHECK_THROWS_AS(classify(exp_f(), constant(0), 2.5, Operator::m_plus_01()),
                  Error);
  try {
    classify(exp_f(), constant(0), 1, Operator::p_plus_k(0));
    FAIL("expected invalid k");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_k);
  }
}
