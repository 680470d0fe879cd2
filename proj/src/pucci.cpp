#include "osserman/pucci.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "osserman/error.hpp"

namespace osserman {

SymMatrix::SymMatrix(std::size_t n) : n_(n), a_(n * (n + 1) / 2, 0.0) {
  if (n > kMaxDim)
    throw Error(ErrorKind::out_of_range, "matrix dimension above 16");
}

SymMatrix SymMatrix::identity(std::size_t n) {
  return diag(std::vector<double>(n, 1.0));
}

SymMatrix SymMatrix::diag(const std::vector<double>& d) {
  SymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
  return m;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  SymMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size())
      throw Error(ErrorKind::out_of_range, "matrix is not square");
    for (std::size_t j = i; j < rows.size(); ++j) {
      if (rows[i][j] != rows[j][i])
        throw Error(ErrorKind::out_of_range, "matrix is not symmetric");
      m.set(i, j, rows[i][j]);
    }
  }
  return m;
}

double SymMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

double SymMatrix::frobenius() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (o.n_ != n_) throw Error(ErrorKind::out_of_range, "dimension mismatch");
  SymMatrix m(n_);
  for (std::size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] + o.a_[k];
  return m;
}

std::vector<double> eigenvalues_sym(const SymMatrix& X) {
  const std::size_t n = X.n();
  std::vector<std::vector<double>> A(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A[i][j] = X(i, j);
  const double norm = X.frobenius();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += A[p][q] * A[p][q];
    if (std::sqrt(off) <= 1e-17 * norm || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A[p][q];
        if (apq == 0.0) continue;
        const double theta = (A[q][q] - A[p][p]) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::hypot(theta, 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp - s * akq;
          A[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk - s * aqk;
          A[q][k] = s * apk + c * aqk;
        }
        A[p][q] = A[q][p] = 0.0;
      }
    }
  }
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = A[i][i];
  std::sort(mu.begin(), mu.end());
  return mu;
}

double apply_to_spectrum(const Operator& op, std::vector<double> mu,
                         double scale) {
  std::sort(mu.begin(), mu.end());
  if (op.kind == Operator::Kind::m_plus_01) {
    const double band = 1e-14 * scale;
    double s = 0.0;
    for (double m : mu)
      if (m > band) s += m;
    return s;
  }
  if (op.k < 1 || std::size_t(op.k) > mu.size())
    throw Error(ErrorKind::invalid_k, "P+_k needs 1 <= k <= n, got k = " +
                                          std::to_string(op.k));
  double s = 0.0;
  for (std::size_t i = mu.size() - std::size_t(op.k); i < mu.size(); ++i)
    s += mu[i];
  return s;
}

double m_plus_01(const SymMatrix& X) {
  return apply_to_spectrum(Operator::m_plus_01(), eigenvalues_sym(X),
                           X.frobenius());
}

double p_plus_k(const SymMatrix& X, int k) {
  if (k < 1 || std::size_t(k) > X.n())
    throw Error(ErrorKind::invalid_k,
                "P+_k needs 1 <= k <= n, got k = " + std::to_string(k));
  return apply_to_spectrum(Operator::p_plus_k(k), eigenvalues_sym(X),
                           X.frobenius());
}

double apply(const Operator& op, const SymMatrix& X) {
  return op.kind == Operator::Kind::m_plus_01 ? m_plus_01(X)
                                              : p_plus_k(X, op.k);
}

RadialLift::RadialLift(std::vector<double> c,
                       std::shared_ptr<const Trajectory> tr)
    : center(std::move(c)), trajectory(std::move(tr)) {
  if (center.empty() || center.size() > SymMatrix::kMaxDim)
    throw Error(ErrorKind::out_of_range, "lift dimension must be in [1, 16]");
  if (!trajectory || trajectory->samples().empty())
    throw Error(ErrorKind::out_of_range, "lift needs a trajectory");
}

RadialDerivatives radial_hessian(const RadialLift& lift,
                                 const std::vector<double>& x) {
  const std::size_t n = lift.n();
  if (x.size() != n)
    throw Error(ErrorKind::out_of_range, "point dimension does not match");
  std::vector<double> d(n);
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = x[i] - lift.center[i];
    r2 += d[i] * d[i];
  }
  const Trajectory& tr = *lift.trajectory;
  double r = std::sqrt(r2);
  // Rounding in |x - x0| may step just past the last knot.
  if (r > tr.r_end() && r <= tr.r_end() * (1.0 + 1e-14)) r = tr.r_end();
  const Sample s = tr.at(r);

  RadialDerivatives out;
  out.r = r;
  out.phi = tr.a() + s.u;
  out.gradient.assign(n, 0.0);
  out.hessian = SymMatrix(n);
  if (r == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.hessian.set(i, i, s.ddphi);
    out.spectrum.assign(n, s.ddphi);
    return out;
  }
  const double radial = s.dphi / r;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = d[i] / r;
    out.gradient[i] = s.dphi * xi;
    for (std::size_t j = i; j < n; ++j) {
      const double xj = d[j] / r;
      out.hessian.set(i, j, (i == j ? radial : 0.0) + (s.ddphi - radial) * xi * xj);
    }
  }
  out.spectrum.assign(n - 1, radial);
  out.spectrum.push_back(s.ddphi);
  return out;
}

std::string RadialCheckReport::summary() const {
  std::ostringstream os;
  os << points << " points, max residual " << max_residual << " (abs "
     << max_abs_residual << ", eigensolver " << max_residual_generic
     << ") at r = " << worst_radius << ", operator gap " << max_operator_gap;
  return os.str();
}

RadialCheckReport verify_radial_solution(const RadialLift& lift,
                                         const ProblemSpec& spec,
                                         const Operator& op, int sample_points,
                                         std::uint64_t seed) {
  const std::size_t n = lift.n();
  if (op.kind == Operator::Kind::m_plus_01) {
    if (spec.c != double(n))
      throw Error(ErrorKind::hypothesis_violation,
                  "M+_{0,1} lifts need c = n");
  } else {
    if (op.k < 1 || std::size_t(op.k) > n)
      throw Error(ErrorKind::invalid_k, "P+_k needs 1 <= k <= n");
    if (spec.c != double(op.k))
      throw Error(ErrorKind::hypothesis_violation, "P+_k lifts need c = k");
    // With g >= 0 the profile satisfies r phi'' >= phi', which puts phi'' on
    // top of the spectrum.
    bool nonneg = spec.g.expr().shape().lo >= 0.0;
    if (!nonneg) {
      nonneg = true;
      for (double t : hypothesis_sample_grid())
        if (spec.g(t) < 0.0) nonneg = false;
    }
    if (!nonneg)
      throw Error(ErrorKind::hypothesis_violation,
                  "P+_k lifts need g >= 0");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const double r_end = lift.trajectory->r_end();

  RadialCheckReport rep;
  auto check = [&](const std::vector<double>& x) {
    const RadialDerivatives D = radial_hessian(lift, x);
    const double scale = D.hessian.frobenius();
    const double closed = apply_to_spectrum(op, D.spectrum, scale);
    const double generic = apply_to_spectrum(op, eigenvalues_sym(D.hessian), scale);
    const double dphi = std::sqrt(std::inner_product(
        D.gradient.begin(), D.gradient.end(), D.gradient.begin(), 0.0));
    const double fv = spec.f(D.phi);
    const double rhs = fv + spec.g(D.phi) * std::pow(dphi, spec.q);
    const double res = std::abs(closed - rhs);
    const double rel = res / (1.0 + std::abs(fv));
    ++rep.points;
    if (rel > rep.max_residual) {
      rep.max_residual = rel;
      rep.worst_radius = D.r;
    }
    rep.max_abs_residual = std::max(rep.max_abs_residual, res);
    rep.max_residual_generic = std::max(
        rep.max_residual_generic, std::abs(generic - rhs) / (1.0 + std::abs(fv)));
    rep.max_operator_gap = std::max(rep.max_operator_gap,
                                    std::abs(closed - generic) / std::max(1.0, scale));
  };
  check(lift.center);
  for (int i = 1; i < sample_points; ++i) {
    std::vector<double> dir(n);
    double nn = 0.0;
    do {
      nn = 0.0;
      for (auto& v : dir) {
        v = normal(rng);
        nn += v * v;
      }
    } while (nn == 0.0);
    const double r = r_end * unit(rng);
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j)
      x[j] = lift.center[j] + r * dir[j] / std::sqrt(nn);
    check(x);
  }
  return rep;
}

std::string EllipticityReport::summary() const {
  std::ostringstream os;
  os << trials << " trials, min F(X+Y)-F(X) " << min_increment
     << ", max excess over tr Y " << max_excess << ", max P+_k - M+ "
     << max_pk_over_m << ", F(0) " << f_of_zero << ", " << violations
     << " violations";
  return os.str();
}

EllipticityReport ellipticity_check(const Operator& op, int trials,
                                    std::uint64_t seed, std::size_t max_dim) {
  if (trials < 1) throw Error(ErrorKind::out_of_range, "trials must be >= 1");
  const std::size_t lo_dim =
      op.kind == Operator::Kind::p_plus_k ? std::size_t(std::max(1, op.k)) : 1;
  if (op.kind == Operator::Kind::p_plus_k && op.k < 1)
    throw Error(ErrorKind::invalid_k, "P+_k needs k >= 1");
  max_dim = std::clamp(max_dim, lo_dim, SymMatrix::kMaxDim);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> dim(lo_dim, max_dim);
  constexpr double kSlack = 1e-9;

  EllipticityReport rep;
  rep.min_increment = std::numeric_limits<double>::infinity();
  rep.max_excess = -std::numeric_limits<double>::infinity();
  rep.max_pk_over_m = -std::numeric_limits<double>::infinity();
  rep.f_of_zero = apply(op, SymMatrix(lo_dim));
  if (rep.f_of_zero != 0.0) ++rep.violations;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = dim(rng);
    SymMatrix X(n), Y(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) X.set(i, j, normal(rng));
    // Y = B B^T with a random number of columns (rank <= cols).
    std::uniform_int_distribution<std::size_t> cols_d(1, n);
    const std::size_t cols = cols_d(rng);
    std::vector<std::vector<double>> B(n, std::vector<double>(cols));
    for (auto& row : B)
      for (auto& v : row) v = normal(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += B[i][c] * B[j][c];
        Y.set(i, j, s);
      }
    const double fx = apply(op, X);
    const double inc = apply(op, X + Y) - fx;
    const double excess = inc - Y.trace();
    rep.min_increment = std::min(rep.min_increment, inc);
    rep.max_excess = std::max(rep.max_excess, excess);
    bool bad = inc < -kSlack || excess > kSlack;
    const double m = m_plus_01(X);
    for (std::size_t k = 1; k <= n; ++k) {
      const double gap = p_plus_k(X, int(k)) - m;
      rep.max_pk_over_m = std::max(rep.max_pk_over_m, gap);
      bad = bad || gap > kSlack;
    }
    if (bad) ++rep.violations;
    ++rep.trials;
  }
  return rep;
}

}  // namespace osserman
