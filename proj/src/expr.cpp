#include "osserman/expr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "osserman/error.hpp"

namespace osserman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double softplus_value(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Trend flip(Trend t) {
  switch (t) {
    case Trend::strictly_increasing: return Trend::strictly_decreasing;
    case Trend::nondecreasing: return Trend::nonincreasing;
    case Trend::strictly_decreasing: return Trend::strictly_increasing;
    case Trend::nonincreasing: return Trend::nondecreasing;
    default: return t;
  }
}

// Trend of m(child) where m is nondecreasing, strictly so when outer_strict.
Trend compose(Trend child, bool outer_strict) {
  switch (child) {
    case Trend::constant: return Trend::constant;
    case Trend::strictly_increasing:
      return outer_strict ? Trend::strictly_increasing : Trend::nondecreasing;
    case Trend::nondecreasing: return Trend::nondecreasing;
    case Trend::strictly_decreasing:
      return outer_strict ? Trend::strictly_decreasing : Trend::nonincreasing;
    case Trend::nonincreasing: return Trend::nonincreasing;
    default: return Trend::unknown;
  }
}

// Scaling by k, then shifting; range endpoints stay ordered.
Shape scaled(const Shape& s, double k, double shift) {
  Shape out;
  if (k == 0.0) {
    out.trend = Trend::constant;
    out.lo = out.hi = shift;
    out.positive = shift > 0.0;
    return out;
  }
  out.trend = k > 0.0 ? s.trend : flip(s.trend);
  double a = k * s.lo + shift;
  double b = k * s.hi + shift;
  out.lo = std::min(a, b);
  out.hi = std::max(a, b);
  if (k > 0.0) {
    out.positive = (s.positive && shift >= 0.0) || out.lo > 0.0;
  } else {
    out.positive = out.lo > 0.0;
  }
  return out;
}

// Shape of max(child, 0)^p for p >= 0.
Shape clamped_power(const Shape& c, double p) {
  Shape out;
  if (p == 0.0) {
    out.trend = Trend::constant;
    out.lo = out.hi = 1.0;
    out.positive = true;
    return out;
  }
  const double blo = std::max(c.lo, 0.0);
  const double bhi = std::max(c.hi, 0.0);
  out.lo = std::pow(blo, p);
  out.hi = std::pow(bhi, p);
  const bool strict = c.lo >= 0.0;
  out.trend = compose(c.trend, strict);
  out.positive = c.positive || c.lo > 0.0;
  return out;
}

}  // namespace

bool is_nondecreasing(Trend t) {
  return t == Trend::constant || t == Trend::nondecreasing ||
         t == Trend::strictly_increasing;
}

bool is_nonincreasing(Trend t) {
  return t == Trend::constant || t == Trend::nonincreasing ||
         t == Trend::strictly_decreasing;
}

struct Expr::Node {
  Kind kind;
  std::vector<double> params;
  std::vector<Expr> children;
};

Expr Expr::constant(double k) {
  return Expr(std::make_shared<Node>(Node{Kind::constant, {k}, {}}));
}

Expr Expr::identity() {
  return Expr(std::make_shared<Node>(Node{Kind::identity, {}, {}}));
}

Expr Expr::affine(double alpha, double beta, Expr child) {
  return Expr(std::make_shared<Node>(
      Node{Kind::affine, {alpha, beta}, {std::move(child)}}));
}

Expr Expr::exp(Expr child) {
  return Expr(std::make_shared<Node>(Node{Kind::exp, {}, {std::move(child)}}));
}

Expr Expr::softplus(Expr child) {
  return Expr(
      std::make_shared<Node>(Node{Kind::softplus, {}, {std::move(child)}}));
}

Expr Expr::power(Expr child, double p) {
  if (!(p >= 0.0) || !std::isfinite(p))
    throw Error(ErrorKind::parse, "power exponent must be finite and >= 0");
  return Expr(
      std::make_shared<Node>(Node{Kind::power, {p}, {std::move(child)}}));
}

Expr Expr::positive_part(Expr child) {
  return Expr(
      std::make_shared<Node>(Node{Kind::positive_part, {}, {std::move(child)}}));
}

Expr Expr::negative_part(Expr child) {
  return Expr(
      std::make_shared<Node>(Node{Kind::negative_part, {}, {std::move(child)}}));
}

Expr Expr::sum(std::vector<Expr> children) {
  if (children.empty())
    throw Error(ErrorKind::parse, "sum needs at least one term");
  return Expr(
      std::make_shared<Node>(Node{Kind::sum, {}, std::move(children)}));
}

Expr Expr::scale(double k, Expr child) {
  return Expr(
      std::make_shared<Node>(Node{Kind::scale, {k}, {std::move(child)}}));
}

Expr Expr::log_power(double p, Expr child) {
  if (!(p >= 0.0) || !std::isfinite(p))
    throw Error(ErrorKind::parse, "log-power exponent must be finite and >= 0");
  return Expr(
      std::make_shared<Node>(Node{Kind::log_power, {p}, {std::move(child)}}));
}

Expr::Kind Expr::kind() const { return node_->kind; }

std::span<const double> Expr::params() const { return node_->params; }

std::span<const Expr> Expr::children() const { return node_->children; }

double Expr::operator()(double t) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::constant: return n.params[0];
    case Kind::identity: return t;
    case Kind::affine: {
      const double alpha = n.params[0];
      if (alpha == 0.0) return n.params[1];
      return alpha * n.children[0](t) + n.params[1];
    }
    case Kind::exp: return std::exp(n.children[0](t));
    case Kind::softplus: return softplus_value(n.children[0](t));
    case Kind::power: {
      const double p = n.params[0];
      if (p == 0.0) return 1.0;
      return std::pow(std::max(n.children[0](t), 0.0), p);
    }
    case Kind::positive_part: return std::max(n.children[0](t), 0.0);
    case Kind::negative_part: return std::max(-n.children[0](t), 0.0);
    case Kind::sum: {
      double s = 0.0;
      for (const auto& c : n.children) s += c(t);
      return s;
    }
    case Kind::scale: {
      if (n.params[0] == 0.0) return 0.0;
      return n.params[0] * n.children[0](t);
    }
    case Kind::log_power: {
      const double p = n.params[0];
      if (p == 0.0) return 1.0;
      return std::pow(std::log1p(std::max(n.children[0](t), 0.0)), p);
    }
  }
  return 0.0;
}

Shape Expr::shape() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::constant: {
      Shape s;
      s.trend = Trend::constant;
      s.lo = s.hi = n.params[0];
      s.positive = n.params[0] > 0.0;
      return s;
    }
    case Kind::identity: {
      Shape s;
      s.trend = Trend::strictly_increasing;
      return s;
    }
    case Kind::affine:
      return scaled(n.children[0].shape(), n.params[0], n.params[1]);
    case Kind::scale: return scaled(n.children[0].shape(), n.params[0], 0.0);
    case Kind::exp: {
      const Shape c = n.children[0].shape();
      Shape s;
      s.trend = compose(c.trend, true);
      s.lo = std::exp(c.lo);
      s.hi = std::exp(c.hi);
      s.positive = true;
      return s;
    }
    case Kind::softplus: {
      const Shape c = n.children[0].shape();
      Shape s;
      s.trend = compose(c.trend, true);
      s.lo = softplus_value(c.lo);
      s.hi = softplus_value(c.hi);
      s.positive = true;
      return s;
    }
    case Kind::power: return clamped_power(n.children[0].shape(), n.params[0]);
    case Kind::positive_part: return clamped_power(n.children[0].shape(), 1.0);
    case Kind::negative_part:
      return clamped_power(scaled(n.children[0].shape(), -1.0, 0.0), 1.0);
    case Kind::log_power: {
      Shape base = clamped_power(n.children[0].shape(), 1.0);
      base.lo = std::log1p(base.lo);
      base.hi = std::log1p(base.hi);
      return clamped_power(base, n.params[0]);
    }
    case Kind::sum: {
      Shape s;
      s.lo = 0.0;
      s.hi = 0.0;
      bool all_up = true, all_down = true, any_strict_up = false,
           any_strict_down = false, all_const = true, all_nonneg = true,
           any_positive = false;
      for (const auto& c : n.children) {
        const Shape cs = c.shape();
        s.lo += cs.lo;
        s.hi += cs.hi;
        all_up = all_up && is_nondecreasing(cs.trend);
        all_down = all_down && is_nonincreasing(cs.trend);
        any_strict_up = any_strict_up || cs.trend == Trend::strictly_increasing;
        any_strict_down =
            any_strict_down || cs.trend == Trend::strictly_decreasing;
        all_const = all_const && cs.trend == Trend::constant;
        all_nonneg = all_nonneg && cs.lo >= 0.0;
        any_positive = any_positive || cs.positive;
      }
      if (std::isnan(s.lo)) s.lo = -kInf;
      if (std::isnan(s.hi)) s.hi = kInf;
      if (all_const) {
        s.trend = Trend::constant;
      } else if (all_up) {
        s.trend = any_strict_up ? Trend::strictly_increasing
                                : Trend::nondecreasing;
      } else if (all_down) {
        s.trend = any_strict_down ? Trend::strictly_decreasing
                                  : Trend::nonincreasing;
      } else {
        s.trend = Trend::unknown;
      }
      s.positive = (all_nonneg && any_positive) || s.lo > 0.0;
      return s;
    }
  }
  return {};
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  std::ostringstream os;
  os.precision(17);
  auto child = [&](std::size_t i) { return n.children[i].to_string(); };
  switch (n.kind) {
    case Kind::constant: os << n.params[0]; break;
    case Kind::identity: os << "t"; break;
    case Kind::affine:
      os << "(" << n.params[0] << "*" << child(0) << " + " << n.params[1]
         << ")";
      break;
    case Kind::exp: os << "exp(" << child(0) << ")"; break;
    case Kind::softplus: os << "softplus(" << child(0) << ")"; break;
    case Kind::power: os << "pos(" << child(0) << ")^" << n.params[0]; break;
    case Kind::positive_part: os << "pos(" << child(0) << ")"; break;
    case Kind::negative_part: os << "neg(" << child(0) << ")"; break;
    case Kind::sum:
      os << "(";
      for (std::size_t i = 0; i < n.children.size(); ++i)
        os << (i ? " + " : "") << child(i);
      os << ")";
      break;
    case Kind::scale: os << n.params[0] << "*" << child(0); break;
    case Kind::log_power:
      os << "log1p(pos(" << child(0) << "))^" << n.params[0];
      break;
  }
  return os.str();
}

}  // namespace osserman
