#include "a3dmm/extrapolate.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cassert>
#include <cmath>

#include "a3dmm/error.hpp"

namespace a3dmm {

DiffWindow::DiffWindow(Index dim, int capacity) {
  if (dim < 1 || capacity < 1) {
    throw Error(Errc::InvalidArgument, "window needs dim >= 1, capacity >= 1");
  }
  data_ = MatrixXd::Zero(dim, capacity);
}

void DiffWindow::push(const VectorXd& v) {
  if (v.size() != dim()) {
    throw Error(Errc::DimensionMismatch,
                "difference has " + std::to_string(v.size()) +
                    " entries, window expects " + std::to_string(dim()));
  }
  const int keep = std::min(count_, capacity() - 1);
  for (int j = keep; j > 0; --j) data_.col(j) = data_.col(j - 1);
  data_.col(0) = v;
  count_ = keep + 1;
}

DiffWindow push_difference(DiffWindow window, const VectorXd& v) {
  window.push(v);
  return window;
}

MatrixXd companion_matrix(const VectorXd& c) {
  const Index q = c.size();
  MatrixXd h = MatrixXd::Zero(q, q);
  h.col(0) = c;
  if (q > 1) h.topRightCorner(q - 1, q - 1).setIdentity();
  return h;
}

double spectral_radius(const MatrixXd& c) {
  if (c.rows() != c.cols()) {
    throw Error(Errc::DimensionMismatch, "spectral radius of non-square matrix");
  }
  if (c.rows() > 32) {
    throw Error(Errc::InvalidArgument, "companion order above 32");
  }
  if (c.rows() == 0) return 0.0;
  if (c.rows() == 1) return std::abs(c(0, 0));
  Eigen::EigenSolver<MatrixXd> es(c, false);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::EigenFailure, "eigenvalues of companion matrix");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

CompanionFit fit_coefficients(const DiffWindow& window, int q) {
  if (q < 1) throw Error(Errc::InvalidArgument, "q must be >= 1");
  if (window.count() < q + 1) {
    throw Error(Errc::InsufficientHistory,
                "need " + std::to_string(q + 1) + " differences, have " +
                    std::to_string(window.count()));
  }
  const MatrixXd past = window.columns().middleCols(1, q);
  const VectorXd newest = window.column(0);
  CompanionFit fit;
  if (past.isZero(0.0)) {
    fit.c = VectorXd::Zero(q);
  } else {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(past);
    fit.c = cod.solve(newest);
  }
  fit.companion = companion_matrix(fit.c);
  fit.rho = spectral_radius(fit.companion);
  fit.residual = (past * fit.c - newest).norm();
  fit.coeff_sum = fit.c.sum();
  return fit;
}

namespace {

void check_fit(const VectorXd& z_k, const DiffWindow& window,
               const CompanionFit& fit) {
  if (z_k.size() != window.dim()) {
    throw Error(Errc::DimensionMismatch, "z_k does not match window");
  }
  if (window.count() < fit.q()) {
    throw Error(Errc::InsufficientHistory, "window shorter than fit");
  }
}

}  // namespace

VectorXd extrapolate_finite(const VectorXd& z_k, const DiffWindow& window,
                            const CompanionFit& fit, int s) {
  if (s < 1) throw Error(Errc::InvalidArgument, "s must be >= 1");
  check_fit(z_k, window, fit);
  const int q = fit.q();
  VectorXd power = VectorXd::Unit(q, 0);
  VectorXd sum = VectorXd::Zero(q);
  for (int i = 1; i <= s; ++i) {
    power = fit.companion * power;
    sum += power;
  }
  return z_k + window.columns().leftCols(q) * sum;
}

VectorXd extrapolate_infinite(const VectorXd& z_k, const DiffWindow& window,
                              const CompanionFit& fit) {
  check_fit(z_k, window, fit);
  if (std::abs(1.0 - fit.coeff_sum) <= kNearSingular) {
    throw Error(Errc::NearSingular, "|1 - sum c| below threshold");
  }
  if (!(fit.rho < 1.0)) {
    throw Error(Errc::InvalidArgument,
                "infinite extrapolation requires rho(C) < 1");
  }
  const int q = fit.q();
  const MatrixXd lhs = MatrixXd::Identity(q, q) - fit.companion;
  const VectorXd y = lhs.partialPivLu().solve(VectorXd::Unit(q, 0));
  VectorXd out = z_k - window.column(0) + window.columns().leftCols(q) * y;
#ifndef NDEBUG
  const VectorXd alt = extrapolate_infinite_weighted(z_k, window, fit);
  assert((out - alt).norm() <=
         1e-8 * (1.0 + out.norm()) / std::abs(1.0 - fit.coeff_sum));
#endif
  return out;
}

VectorXd past_iterate(const VectorXd& z_k, const DiffWindow& window, int j) {
  if (j < 0 || j > window.count()) {
    throw Error(Errc::InsufficientHistory, "past iterate out of window");
  }
  VectorXd z = z_k;
  for (int i = 0; i < j; ++i) z -= window.column(i);
  return z;
}

VectorXd extrapolate_infinite_weighted(const VectorXd& z_k,
                                       const DiffWindow& window,
                                       const CompanionFit& fit) {
  check_fit(z_k, window, fit);
  const double denom = 1.0 - fit.coeff_sum;
  if (std::abs(denom) <= kNearSingular) {
    throw Error(Errc::NearSingular, "|1 - sum c| below threshold");
  }
  VectorXd acc = z_k;
  VectorXd z = z_k;
  for (int j = 1; j <= fit.q(); ++j) {
    z -= window.column(j - 1);
    acc -= fit.c(j - 1) * z;
  }
  return acc / denom;
}

VectorXd rre_coefficients(const DiffWindow& window, int q) {
  if (q < 1) throw Error(Errc::InvalidArgument, "q must be >= 1");
  if (window.count() < q + 1) {
    throw Error(Errc::InsufficientHistory,
                "need " + std::to_string(q + 1) + " differences");
  }
  const int n = q + 1;
  const MatrixXd v = window.columns().leftCols(n);
  // g = g0 + N t where g0 = 1/n and N spans {t : sum t = 0}.
  const VectorXd g0 = VectorXd::Constant(n, 1.0 / n);
  MatrixXd basis = MatrixXd::Identity(n, n);
  basis.col(0).setOnes();
  Eigen::HouseholderQR<MatrixXd> qr(basis);
  const MatrixXd null = MatrixXd(qr.householderQ()).rightCols(q);
  const MatrixXd vn = v * null;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(vn);
  if (cod.rank() < q) {
    throw Error(Errc::DegenerateConstraint,
                "constrained least squares is singular (rank " +
                    std::to_string(cod.rank()) + " < " + std::to_string(q) +
                    ")");
  }
  const VectorXd t = cod.solve(-(v * g0));
  VectorXd g = g0 + null * t;
  // Remove the rounding drift in the constraint.
  g(0) += 1.0 - g.sum();
  return g;
}

VectorXd rre_point(const VectorXd& z_k, const DiffWindow& window,
                   const VectorXd& weights) {
  if (weights.size() < 1 || weights.size() > window.count() + 1) {
    throw Error(Errc::InsufficientHistory, "weights longer than window");
  }
  VectorXd z = z_k;
  VectorXd acc = weights(0) * z;
  for (Index j = 1; j < weights.size(); ++j) {
    z -= window.column(static_cast<int>(j - 1));
    acc += weights(j) * z;
  }
  return acc;
}

double fitting_error_bound(const CompanionFit& fit,
                           const std::vector<double>& m_power_norms, int s) {
  if (s < 1) throw Error(Errc::InvalidArgument, "s must be >= 1");
  if (static_cast<int>(m_power_norms.size()) < s) {
    throw Error(Errc::InsufficientData, "need |M^l| for l = 1..s");
  }
  // diag[i] = (C^i)_(1,1); partial[t] = sum_{i=0}^t diag[i].
  std::vector<double> partial(s);
  VectorXd col = VectorXd::Unit(fit.q(), 0);
  double running = 0.0;
  for (int i = 0; i < s; ++i) {
    running += col(0);
    partial[i] = running;
    col = fit.companion * col;
  }
  double bound = 0.0;
  for (int l = 1; l <= s; ++l) {
    bound += m_power_norms[l - 1] * std::abs(partial[s - l]);
  }
  return bound;
}

double fitting_error_bound_infinite(const CompanionFit& fit, double m_norm) {
  if (!(m_norm < 1.0) || !(fit.rho < 1.0)) {
    throw Error(Errc::DivergentSeries, "bound requires |M| < 1, rho(C) < 1");
  }
  const double denom = std::abs(1.0 - fit.coeff_sum);
  if (denom <= kNearSingular) {
    throw Error(Errc::NearSingular, "|1 - sum c| below threshold");
  }
  return m_norm / (1.0 - m_norm) / denom;
}

}  // namespace a3dmm
