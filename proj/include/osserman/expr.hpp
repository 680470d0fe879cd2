#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace osserman {

/// Direction of a function of one real variable, as far as it can be proven
/// from the shape of an expression tree.
enum class Trend {
  constant,
  strictly_increasing,
  nondecreasing,
  strictly_decreasing,
  nonincreasing,
  unknown,
};

bool is_nondecreasing(Trend t);
bool is_nonincreasing(Trend t);

/// Structural facts about an expression over all of R: a proven trend and an
/// interval enclosing its range. `positive` means the value is > 0 everywhere.
struct Shape {
  Trend trend = Trend::unknown;
  double lo = -1.0 / 0.0;
  double hi = 1.0 / 0.0;
  bool positive = false;
};

/// Immutable expression tree in one variable t. Nodes are shared, so copies
/// are cheap and safe to hand to other threads.
///
/// Every node is total: power and log-power clamp their base at zero, so
/// evaluation never produces a domain error (it may still overflow to +inf).
class Expr {
 public:
  enum class Kind {
    constant,
    identity,
    affine,         // alpha * child + beta
    exp,
    softplus,       // ln(1 + e^child)
    power,          // max(child, 0)^p
    positive_part,  // max(child, 0)
    negative_part,  // max(-child, 0)
    sum,
    scale,          // k * child
    log_power,      // ln(1 + max(child, 0))^p
  };

  static Expr constant(double k);
  static Expr identity();
  static Expr affine(double alpha, double beta, Expr child);
  static Expr exp(Expr child);
  static Expr softplus(Expr child);
  static Expr power(Expr child, double p);
  static Expr positive_part(Expr child);
  static Expr negative_part(Expr child);
  static Expr sum(std::vector<Expr> children);
  static Expr scale(double k, Expr child);
  static Expr log_power(double p, Expr child);

  double operator()(double t) const;

  Kind kind() const;
  /// Numeric parameters in declaration order (k; alpha, beta; p; ...).
  std::span<const double> params() const;
  std::span<const Expr> children() const;

  Shape shape() const;

  /// Compact infix rendering for reports, e.g. "exp(t)".
  std::string to_string() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace osserman
