#include "osserman/nonlin.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "osserman/error.hpp"

namespace osserman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

PropertyCheck sampled_sign(const Nonlinearity& n, const std::string& name,
                           bool (*ok)(double)) {
  PropertyCheck c{name, true, "sampled", std::nullopt, std::nullopt};
  for (double t : hypothesis_sample_grid()) {
    if (!ok(n(t))) {
      c.passed = false;
      c.witness = t;
      return c;
    }
  }
  return c;
}

PropertyCheck sampled_increase(const Nonlinearity& n, const std::string& name,
                               bool strict) {
  PropertyCheck c{name, true, "sampled", std::nullopt, std::nullopt};
  const auto& grid = hypothesis_sample_grid();
  double prev_t = grid.front();
  double prev_v = n(prev_t);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t == prev_t) continue;
    const double v = n(t);
    const double mag = std::max(std::abs(v), std::abs(prev_v));
    const double diff = v - prev_v;
    const bool fine = strict ? (diff > 0.0 && diff > 1e-12 * mag)
                             : (diff >= -1e-14 * mag);
    if (!fine) {
      c.passed = false;
      c.witness = prev_t;
      c.witness_next = t;
      return c;
    }
    prev_t = t;
    prev_v = v;
  }
  return c;
}

PropertyCheck check_property(const Nonlinearity& n, const std::string& name) {
  const Shape s = n.expr().shape();
  auto structural = [&](bool proven) -> std::optional<PropertyCheck> {
    if (proven) return PropertyCheck{name, true, "structural", {}, {}};
    return std::nullopt;
  };
  std::optional<PropertyCheck> proof;
  if (name == "positive") {
    proof = structural(s.positive);
    if (!proof) return sampled_sign(n, name, [](double v) { return v > 0.0; });
  } else if (name == "nonnegative") {
    proof = structural(s.lo >= 0.0);
    if (!proof) return sampled_sign(n, name, [](double v) { return v >= 0.0; });
  } else if (name == "nonpositive") {
    proof = structural(s.hi <= 0.0);
    if (!proof) return sampled_sign(n, name, [](double v) { return v <= 0.0; });
  } else if (name == "nondecreasing") {
    proof = structural(is_nondecreasing(s.trend));
    if (!proof) return sampled_increase(n, name, false);
  } else if (name == "strictly_increasing") {
    proof = structural(s.trend == Trend::strictly_increasing);
    if (!proof) return sampled_increase(n, name, true);
  } else {
    throw Error(ErrorKind::hypothesis_violation, "unknown property " + name);
  }
  return *proof;
}

[[noreturn]] void reject(const std::string& expr, const std::string& why) {
  throw Error(ErrorKind::hypothesis_violation, expr + ": " + why);
}

void check_tail(const Nonlinearity& n) {
  const std::array<double, 3> ts{1e2, 1e3, 1e4};
  std::array<double, 3> v{};
  for (std::size_t i = 0; i < ts.size(); ++i) v[i] = n(ts[i]);
  const std::string name = n.expr().to_string();

  if (auto L = n.limit_at_infinity()) {
    if (*L == kInf) {
      // Overflow to +inf counts as still increasing.
      if (!((v[0] < v[1] || v[1] == kInf) && (v[1] < v[2] || v[2] == kInf)))
        reject(name, "declared limit +inf but the tail does not increase");
    } else if (*L == -kInf) {
      if (!((v[0] > v[1] || v[1] == -kInf) && (v[1] > v[2] || v[2] == -kInf)))
        reject(name, "declared limit -inf but the tail does not decrease");
    } else {
      const double gap = std::abs(v[2] - *L);
      if (!(gap <= 1e-3 * (1.0 + std::abs(*L))) ||
          !(gap <= std::abs(v[0] - *L) + 1e-12))
        reject(name, "declared limit " + fmt_double(*L) +
                         " does not match tail value " + fmt_double(v[2]));
    }
  }

  if (auto g = n.growth()) {
    using K = GrowthClass::Kind;
    if (g->kind != K::bounded && !(v[0] > 0.0 && v[1] > 0.0))
      reject(name, "growth class needs a positive tail");
    switch (g->kind) {
      case K::power: {
        const double slope = std::log(v[2] / v[1]) / std::log(10.0);
        if (!(std::abs(slope - g->alpha) <= 0.1))
          reject(name, "declared power growth " + fmt_double(g->alpha) +
                           " but log-log slope is " + fmt_double(slope));
        break;
      }
      case K::log_power: {
        const double slope = std::log(v[2] / v[1]) /
                             std::log(std::log(1e4) / std::log(1e3));
        if (!(std::abs(slope - g->alpha) <= 0.15))
          reject(name, "declared log-power growth " + fmt_double(g->alpha) +
                           " but the log slope is " + fmt_double(slope));
        break;
      }
      case K::exponential:
        if (!(std::log(v[1]) - std::log(v[0]) >= 5.0))
          reject(name, "declared exponential growth but tail grows slowly");
        break;
      case K::bounded:
        if (!std::isfinite(v[2]) ||
            !(std::abs(v[2] - v[1]) <= 1e-2 * (1.0 + std::abs(v[2]))))
          reject(name, "declared bounded but the tail keeps moving");
        break;
    }
    if (auto L = n.limit_at_infinity();
        L && g->kind != K::bounded && !(g->kind == K::power && g->alpha == 0.0) &&
        *L != kInf)
      reject(name, "unbounded growth class with a finite declared limit");
  }
}

}  // namespace

std::string GrowthClass::to_string() const {
  switch (kind) {
    case Kind::power: return "power(" + fmt_double(alpha) + ")";
    case Kind::log_power: return "log_power(" + fmt_double(alpha) + ")";
    case Kind::exponential: return "exponential";
    case Kind::bounded: return "bounded";
  }
  return "?";
}

const std::vector<double>& hypothesis_sample_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    constexpr int kUniform = 10000;
    constexpr int kRandom = 1000;
    g.reserve(kUniform + kRandom);
    for (int i = 0; i < kUniform; ++i)
      g.push_back(-100.0 + 200.0 * i / (kUniform - 1));
    std::mt19937_64 rng(0x6b656c6c6572ULL);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < kRandom; ++i) g.push_back(u(rng));
    std::sort(g.begin(), g.end());
    return g;
  }();
  return grid;
}

Nonlinearity::Nonlinearity(Expr expr, ClaimedProperties claims,
                           std::optional<double> limit_at_infinity,
                           std::optional<GrowthClass> growth)
    : expr_(std::move(expr)),
      claims_(claims),
      limit_(limit_at_infinity),
      growth_(growth) {
  const std::pair<bool, const char*> wanted[] = {
      {claims_.nondecreasing, "nondecreasing"},
      {claims_.strictly_increasing, "strictly_increasing"},
      {claims_.positive, "positive"},
      {claims_.nonnegative, "nonnegative"},
      {claims_.nonpositive, "nonpositive"},
  };
  for (const auto& [claimed, name] : wanted) {
    if (!claimed) continue;
    PropertyCheck c = check_property(*this, name);
    if (!c.passed) {
      std::string why = std::string("claimed ") + name + " fails";
      if (c.witness) why += " at t = " + fmt_double(*c.witness);
      if (c.witness_next) why += " .. " + fmt_double(*c.witness_next);
      reject(expr_.to_string(), why);
    }
  }
  check_tail(*this);
}

std::optional<Asymptote> Nonlinearity::asymptote() const {
  if (!growth_) return std::nullopt;
  switch (growth_->kind) {
    case GrowthClass::Kind::power: return Asymptote::power_law(growth_->alpha);
    case GrowthClass::Kind::log_power:
      return Asymptote::power_law(0.0, growth_->alpha);
    case GrowthClass::Kind::exponential: return Asymptote::growth();
    case GrowthClass::Kind::bounded:
      if (limit_ && std::isfinite(*limit_) && *limit_ > 0.0)
        return Asymptote::constant();
      return std::nullopt;
  }
  return std::nullopt;
}

bool HypothesisReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const PropertyCheck& c) { return c.passed; });
}

std::string HypothesisReport::summary() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& c : checks) {
    os << c.property << ": " << (c.passed ? "pass" : "FAIL") << " ("
       << c.method;
    if (c.witness) os << ", witness t = " << *c.witness;
    if (c.witness_next) os << " .. " << *c.witness_next;
    os << ")\n";
  }
  return os.str();
}

HypothesisReport verify_hypotheses(const Nonlinearity& n, Profile profile,
                                   Role role) {
  HypothesisReport r;
  if (role == Role::f) {
    r.checks.push_back(check_property(n, "positive"));
    r.checks.push_back(check_property(n, "nondecreasing"));
    if (profile == Profile::comparison)
      r.checks.push_back(check_property(n, "strictly_increasing"));
  } else {
    r.checks.push_back(check_property(n, "nondecreasing"));
  }
  return r;
}

SignSplit sign_parts(const Nonlinearity& g) {
  const auto L = g.limit_at_infinity();
  std::optional<double> plus_limit, minus_limit;
  if (L) {
    plus_limit = std::max(*L, 0.0);
    minus_limit = std::max(-*L, 0.0);
  }
  std::optional<GrowthClass> plus_growth, minus_growth;
  if (auto gr = g.growth()) {
    if (L && *L > 0.0) plus_growth = gr;
    if (L && std::isfinite(*L)) minus_growth = GrowthClass::bounded();
  }
  ClaimedProperties plus_claims;
  plus_claims.nonnegative = true;
  plus_claims.nondecreasing = g.claims().nondecreasing;
  ClaimedProperties minus_claims;
  minus_claims.nonnegative = true;
  return {
      Nonlinearity(Expr::positive_part(g.expr()), plus_claims, plus_limit,
                   plus_growth),
      Nonlinearity(Expr::negative_part(g.expr()), minus_claims, minus_limit,
                   minus_growth),
  };
}

// ---------------------------------------------------------------------------
// CumulativeIntegral

namespace {

// Knots sit at offsets 0, d, 2d, 4d, ... (mirrored for negative offsets).
constexpr double kKnotBase = 1.0 / 16.0;

double knot_offset(std::size_t j) {
  return j == 0 ? 0.0 : std::ldexp(kKnotBase, static_cast<int>(j) - 1);
}

std::size_t knot_below(double s) {
  if (s < kKnotBase) return 0;
  const int e = std::ilogb(s / kKnotBase);
  return static_cast<std::size_t>(e) + 1;
}

QuadOptions cumulative_quad() {
  QuadOptions o;
  o.rel_tol = 1e-10;
  o.abs_tol = 0.0;
  o.max_panels = 2000;
  return o;
}

}  // namespace

struct CumulativeIntegral::Knots {
  std::shared_mutex mutex;
  std::vector<double> values{0.0};  // integral over [0, knot_j] in offsets
  // Earlier query points, so nearby queries only integrate a short piece.
  std::map<double, double> seen;
};

namespace {
constexpr std::size_t kMaxSeen = std::size_t{1} << 18;
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> integrand,
                                       double base, bool nonnegative)
    : integrand_(std::move(integrand)),
      base_(base),
      nonnegative_(nonnegative),
      up_(std::make_shared<Knots>()),
      down_(std::make_shared<Knots>()) {}

double CumulativeIntegral::at_offset(double s) const {
  if (s == 0.0) return 0.0;
  if (std::isnan(s)) return s;
  const double sign = s > 0.0 ? 1.0 : -1.0;
  const double mag = std::abs(s);
  Knots& knots = s > 0.0 ? *up_ : *down_;
  // Integrand in "magnitude" coordinates: x >= 0 maps to base + sign * x.
  auto g = [this, sign](double x) { return integrand_(base_ + sign * x); };

  auto piece = [&](double lo, double hi) -> double {
    if (hi <= lo) return 0.0;
    try {
      return integrate_finite({g, Singularity::none}, lo, hi, cumulative_quad())
          .value;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::non_finite) throw;
      const double end = g(hi);
      if (nonnegative_ && (end == kInf || std::isnan(end))) return kInf;
      if (std::isinf(end)) return end;
      throw;
    }
  };

  const std::size_t j = knot_below(mag);
  double at_knot;
  {
    std::shared_lock lock(knots.mutex);
    if (j < knots.values.size()) at_knot = knots.values[j];
    else at_knot = std::numeric_limits<double>::quiet_NaN();
  }
  if (std::isnan(at_knot)) {
    std::unique_lock lock(knots.mutex);
    while (knots.values.size() <= j) {
      const std::size_t k = knots.values.size();
      const double prev = knots.values.back();
      const double next =
          std::isinf(prev) ? prev
                           : prev + piece(knot_offset(k - 1), knot_offset(k));
      knots.values.push_back(next);
    }
    at_knot = knots.values[j];
  }
  if (std::isinf(at_knot)) return sign * at_knot;
  double from = knot_offset(j);
  {
    std::shared_lock lock(knots.mutex);
    auto it = knots.seen.upper_bound(mag);
    if (it != knots.seen.begin()) {
      --it;
      if (it->first >= from) {
        from = it->first;
        at_knot = it->second;
      }
    }
  }
  if (from == mag) return sign * at_knot;
  const double value = at_knot + piece(from, mag);
  if (std::isfinite(value)) {
    std::unique_lock lock(knots.mutex);
    if (knots.seen.size() < kMaxSeen) knots.seen.emplace(mag, value);
  }
  return sign * value;
}

CumulativeIntegral antiderivative(const Nonlinearity& n, double a) {
  const bool nonneg = n.claims().positive || n.claims().nonnegative;
  return CumulativeIntegral([n](double t) { return n(t); }, a, nonneg);
}

// ---------------------------------------------------------------------------
// WeightH

WeightH::WeightH(Nonlinearity f, Nonlinearity g, double q)
    : f_(std::move(f)), g_(sign_parts(g)), q_(q) {
  if (!(q > 0.0 && q <= 2.0))
    throw Error(ErrorKind::hypothesis_violation, "q must lie in (0,2]");
}

double WeightH::operator()(double t) const {
  const double gm = g_.minus(t);
  if (gm == 0.0) return 0.0;
  const double f = f_(t);
  // (g^-/f)^(2/q) f written so that an overflowing f cannot produce 0 * inf.
  return std::pow(gm, 2.0 / q_) * std::pow(f, 1.0 - 2.0 / q_);
}

WeightH weight_h(const Nonlinearity& f, const Nonlinearity& g, double q) {
  return WeightH(f, g, q);
}

// ---------------------------------------------------------------------------
// RelaxedIntegral

namespace {

constexpr int kStages = 5;

// Radau IIA collocation (order 2s - 1, L-stable). Nodes are the roots of
// P_s(x) - P_{s-1}(x) on [-1, 1] mapped to (0, 1]; a[i][j] is the integral of
// the j-th Lagrange basis polynomial over [0, c_i].
struct RadauRule {
  std::array<double, kStages> c{};
  std::array<std::array<double, kStages>, kStages> a{};

  RadauRule() {
    auto R = [](double x) {
      return boost::math::legendre_p(kStages, x) -
             boost::math::legendre_p(kStages - 1, x);
    };
    int found = 0;
    constexpr int kScan = 20000;
    double x0 = -1.0, r0 = R(x0);
    for (int i = 1; i <= kScan && found < kStages - 1; ++i) {
      const double x1 = -1.0 + 2.0 * i / kScan;
      const double r1 = R(x1);
      if (r0 != 0.0 && (r0 < 0.0) != (r1 < 0.0)) {
        auto root = boost::math::tools::bisect(
            R, x0, x1, boost::math::tools::eps_tolerance<double>());
        c[found++] = 0.5 * (0.5 * (root.first + root.second) + 1.0);
      }
      x0 = x1;
      r0 = r1;
    }
    c[kStages - 1] = 1.0;
    using GL = boost::math::quadrature::gauss<double, 8>;
    auto basis = [this](int j, double t) {
      double v = 1.0;
      for (int m = 0; m < kStages; ++m)
        if (m != j) v *= (t - c[m]) / (c[j] - c[m]);
      return v;
    };
    for (int i = 0; i < kStages; ++i)
      for (int j = 0; j < kStages; ++j)
        a[i][j] = GL::integrate([&](double t) { return basis(j, t); }, 0.0,
                                c[i]);
  }
};

const RadauRule& radau_rule() {
  static const RadauRule rule;
  return rule;
}

}  // namespace

struct RelaxedIntegral::Knots {
  std::shared_mutex mutex;
  std::vector<double> s{0.0};
  std::vector<double> psi{0.0};
  double next_step = 1e-2;
};

RelaxedIntegral::RelaxedIntegral(std::function<double(double)> source,
                                 std::function<double(double)> rate,
                                 double base)
    : source_(std::move(source)),
      rate_(std::move(rate)),
      base_(base),
      knots_(std::make_shared<Knots>()) {}

namespace {

// One Radau IIA step of psi' = f - 2 k psi over [x0, x0 + H], coordinates in
// offsets from the base. The equation is linear, so the stage system
// (I + 2 H A K) Y = psi0 + H A F is solved directly.
template <typename Src, typename Rate>
double relax_step(const Src& f, const Rate& k, double x0, double H,
                  double psi0) {
  if (std::isinf(psi0)) return psi0;
  const RadauRule& R = radau_rule();
  std::array<double, kStages> kv{}, fv{};
  for (int i = 0; i < kStages; ++i) {
    const double x = x0 + R.c[i] * H;
    kv[i] = k(x);
    fv[i] = f(x);
  }
  for (double v : fv)
    if (std::isinf(v)) return v;
  std::array<std::array<double, kStages + 1>, kStages> m{};
  for (int i = 0; i < kStages; ++i) {
    double rhs = psi0;
    for (int j = 0; j < kStages; ++j) {
      m[i][j] = (i == j ? 1.0 : 0.0) + 2.0 * H * R.a[i][j] * kv[j];
      rhs += H * R.a[i][j] * fv[j];
    }
    m[i][kStages] = rhs;
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < kStages; ++col) {
    int piv = col;
    for (int r = col + 1; r < kStages; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    for (int r = col + 1; r < kStages; ++r) {
      const double factor = m[r][col] / m[col][col];
      for (int cc = col; cc <= kStages; ++cc) m[r][cc] -= factor * m[col][cc];
    }
  }
  std::array<double, kStages> y{};
  for (int r = kStages - 1; r >= 0; --r) {
    double acc = m[r][kStages];
    for (int cc = r + 1; cc < kStages; ++cc) acc -= m[r][cc] * y[cc];
    y[r] = acc / m[r][r];
  }
  // Stiffly accurate: the last stage is the step value. Finite data give NaN
  // only through inf - inf in the elimination, i.e. an overflowing psi.
  return std::isnan(y[kStages - 1]) ? kInf : y[kStages - 1];
}

}  // namespace

double RelaxedIntegral::at_offset(double s) const {
  if (s < 0.0)
    throw Error(ErrorKind::out_of_range,
                "weighted cumulative integral queried below its base point");
  if (s == 0.0) return 0.0;
  auto f = [this](double x) { return source_(base_ + x); };
  auto k = [this](double x) { return rate_(base_ + x); };

  constexpr double kRel = 1e-11;
  // Adaptive advance from (x, psi) to target; records accepted points when
  // `record` is set. Returns psi(target).
  auto advance = [&](double x, double psi, double target, double& step,
                     std::vector<double>* xs, std::vector<double>* ps) {
    int guard = 0;
    while (x < target) {
      if (++guard > 1000000)
        throw Error(ErrorKind::step_underflow,
                    "weighted cumulative integral: too many steps");
      double H = std::min(step, target - x);
      const bool last = H >= target - x;
      const double full = relax_step(f, k, x, H, psi);
      const double half =
          relax_step(f, k, x + 0.5 * H, 0.5 * H,
                     relax_step(f, k, x, 0.5 * H, psi));
      double err = std::abs(full - half);
      if (std::isnan(err)) err = kInf;
      // Overflow of the refined value is accepted as is.
      if (std::isinf(half)) err = 0.0;
      const double scale = kRel * std::abs(half) + 1e-300;
      if (err <= scale || H <= 1e-14 * std::max(1.0, x)) {
        if (H <= 1e-14 * std::max(1.0, x) && err > scale && !std::isinf(half))
          throw Error(ErrorKind::step_underflow,
                      "weighted cumulative integral: step collapsed at offset " +
                          fmt_double(x));
        x = last ? target : x + H;
        psi = half;
        if (xs) {
          xs->push_back(x);
          ps->push_back(psi);
        }
        const double ratio = err > 0.0 ? std::pow(scale / err, 1.0 / 10.0) : 4.0;
        if (!last) step = H * std::clamp(0.9 * ratio, 0.2, 4.0);
      } else {
        step = H * std::clamp(0.9 * std::pow(scale / err, 1.0 / 10.0), 0.1, 0.5);
      }
    }
    return psi;
  };

  Knots& kn = *knots_;
  double x0, psi0;
  {
    std::shared_lock lock(kn.mutex);
    if (s <= kn.s.back()) {
      auto it = std::upper_bound(kn.s.begin(), kn.s.end(), s);
      const std::size_t j = static_cast<std::size_t>(it - kn.s.begin()) - 1;
      x0 = kn.s[j];
      psi0 = kn.psi[j];
      if (x0 == s) return psi0;
      double step = s - x0;
      lock.unlock();
      return advance(x0, psi0, s, step, nullptr, nullptr);
    }
  }
  std::unique_lock lock(kn.mutex);
  if (s > kn.s.back()) {
    // Extend the knot table in geometric chunks past the query.
    const double target = std::max(s, 2.0 * kn.s.back());
    std::vector<double> xs, ps;
    double step = kn.next_step;
    advance(kn.s.back(), kn.psi.back(), target, step, &xs, &ps);
    kn.s.insert(kn.s.end(), xs.begin(), xs.end());
    kn.psi.insert(kn.psi.end(), ps.begin(), ps.end());
    kn.next_step = step;
  }
  auto it = std::upper_bound(kn.s.begin(), kn.s.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - kn.s.begin()) - 1;
  x0 = kn.s[j];
  psi0 = kn.psi[j];
  lock.unlock();
  if (x0 == s) return psi0;
  double step = s - x0;
  return advance(x0, psi0, s, step, nullptr, nullptr);
}

double weighted_cumulative(const Nonlinearity& f, const WeightH& h, double a,
                           double t) {
  RelaxedIntegral psi([f](double x) { return f(x); },
                      [h](double x) { return h(x); }, a);
  return psi(t);
}

}  // namespace osserman
