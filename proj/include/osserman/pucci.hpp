#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "osserman/classify.hpp"
#include "osserman/ode.hpp"

namespace osserman {

/// Dense symmetric matrix of dimension n <= 16, upper triangle stored.
class SymMatrix {
 public:
  static constexpr std::size_t kMaxDim = 16;

  explicit SymMatrix(std::size_t n = 0);
  static SymMatrix identity(std::size_t n);
  static SymMatrix diag(const std::vector<double>& d);
  /// Throws Error(out_of_range) for non-square or non-symmetric input.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return i <= j ? a_[index(i, j)] : a_[index(j, i)];
  }
  void set(std::size_t i, std::size_t j, double v) {
    if (i <= j) a_[index(i, j)] = v; else a_[index(j, i)] = v;
  }
  double trace() const;
  double frobenius() const;
  SymMatrix operator+(const SymMatrix& o) const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    return i * n_ - i * (i + 1) / 2 + j;
  }
  std::size_t n_;
  std::vector<double> a_;
};

/// All eigenvalues in ascending order (cyclic Jacobi).
std::vector<double> eigenvalues_sym(const SymMatrix& X);

/// Sum of the positive eigenvalues; |mu| <= 1e-14 |X| counts as zero.
double m_plus_01(const SymMatrix& X);
/// Sum of the k largest eigenvalues; Error(invalid_k) unless 1 <= k <= n.
double p_plus_k(const SymMatrix& X, int k);
double apply(const Operator& op, const SymMatrix& X);
/// The same operators on a known spectrum (any order). `scale` sets the
/// deadband of M+_{0,1}.
double apply_to_spectrum(const Operator& op, std::vector<double> mu,
                         double scale);

/// Phi(x) = phi(|x - x0|) for a radial trajectory, in dimension n.
struct RadialLift {
  RadialLift(std::vector<double> center, std::shared_ptr<const Trajectory> tr);

  std::vector<double> center;
  std::shared_ptr<const Trajectory> trajectory;
  std::size_t n() const { return center.size(); }
};

struct RadialDerivatives {
  double r = 0.0;
  double phi = 0.0;
  std::vector<double> gradient;
  SymMatrix hessian;
  /// {phi'/r (n-1 times), phi''}, or phi'' n times at the center.
  std::vector<double> spectrum;
};

/// D^2 Phi = (phi'/r) I + (phi'' - phi'/r) xhat xhat^T, phi''(0) I at the
/// center. Error(out_of_range) beyond the trajectory.
RadialDerivatives radial_hessian(const RadialLift& lift,
                                 const std::vector<double>& x);

struct RadialCheckReport {
  std::size_t points = 0;
  double max_residual = 0.0;  // |F - f - g |D Phi|^q| / (1 + |f(Phi)|)
  double max_abs_residual = 0.0;
  double max_residual_generic = 0.0;  // same with the eigensolver spectrum
  double max_operator_gap = 0.0;      // |F_closed - F_generic| / max(1, |X|)
  double worst_radius = 0.0;
  bool operators_agree() const { return max_operator_gap <= 1e-10; }
  std::string summary() const;
};

/// Residual of the PDE for the lift at random points of the ball of
/// validity. M+_{0,1} needs spec.c = n; P+_k needs spec.c = k and g >= 0
/// (Error(hypothesis_violation) otherwise).
RadialCheckReport verify_radial_solution(const RadialLift& lift,
                                         const ProblemSpec& spec,
                                         const Operator& op, int sample_points,
                                         std::uint64_t seed = 1);

struct EllipticityReport {
  int trials = 0;
  double min_increment = 0.0;        // min F(X+Y) - F(X)
  double max_excess = 0.0;           // max F(X+Y) - F(X) - tr Y
  double max_pk_over_m = 0.0;        // max P+_k(X) - M+_{0,1}(X) over k
  double f_of_zero = 0.0;
  int violations = 0;
  bool passed() const { return violations == 0; }
  std::string summary() const;
};

/// Degenerate ellipticity 0 <= F(X+Y) - F(X) <= tr Y on random symmetric X
/// and positive semidefinite Y = B B^T, P+_k <= M+_{0,1}, and F(0) = 0.
/// Dimensions are drawn from [max(1, k), max_dim].
EllipticityReport ellipticity_check(const Operator& op, int trials,
                                    std::uint64_t seed = 1,
                                    std::size_t max_dim = 8);

}  // namespace osserman
