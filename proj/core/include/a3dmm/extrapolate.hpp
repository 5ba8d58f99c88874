#pragma once

#include <vector>

#include "a3dmm/linear_map.hpp"

namespace a3dmm {

/// Sliding window of successive differences v_k = z_k - z_{k-1}, newest
/// first. Column j holds v_{k-j}.
class DiffWindow {
 public:
  DiffWindow(Index dim, int capacity);

  /// Prepends v; drops the oldest column once at capacity.
  void push(const VectorXd& v);
  void clear() { count_ = 0; }

  Index dim() const { return data_.rows(); }
  int capacity() const { return static_cast<int>(data_.cols()); }
  int count() const { return count_; }
  bool full() const { return count_ == capacity(); }

  /// The `count()` filled columns.
  auto columns() const { return data_.leftCols(count_); }
  auto column(int j) const { return data_.col(j); }

 private:
  MatrixXd data_;
  int count_ = 0;
};

DiffWindow push_difference(DiffWindow window, const VectorXd& v);

struct CompanionFit {
  VectorXd c;
  MatrixXd companion;
  double rho = 0.0;
  /// |V_{k-1} c - v_k|
  double residual = 0.0;
  double coeff_sum = 0.0;

  int q() const { return static_cast<int>(c.size()); }
};

/// H(c): first column c, ones on the superdiagonal.
MatrixXd companion_matrix(const VectorXd& c);

/// Largest eigenvalue modulus of a (small, q <= 32) square matrix.
double spectral_radius(const MatrixXd& c);

/// argmin_c |V_{k-1} c - v_k| with V_{k-1} = columns 1..q and v_k = column 0.
/// Minimum-norm solution when V_{k-1} is rank deficient.
CompanionFit fit_coefficients(const DiffWindow& window, int q);

/// z_k + V_k (sum_{i=1}^s C^i)_(:,1) where V_k is columns 0..q-1.
VectorXd extrapolate_finite(const VectorXd& z_k, const DiffWindow& window,
                            const CompanionFit& fit, int s);

/// z_{k-1} + V_k ((I - C)^{-1})_(:,1). Throws NearSingular when
/// |1 - sum c| <= kNearSingular.
VectorXd extrapolate_infinite(const VectorXd& z_k, const DiffWindow& window,
                              const CompanionFit& fit);

/// (z_k - sum_{j=1}^q c_j z_{k-j}) / (1 - sum c), the same point written as
/// a weighted sum of past iterates. Kept as an independent cross-check.
VectorXd extrapolate_infinite_weighted(const VectorXd& z_k,
                                       const DiffWindow& window,
                                       const CompanionFit& fit);

inline constexpr double kNearSingular = 1e-12;

/// Weights g (q+1 entries, newest first) minimizing |sum_j g_j v_{k-j}| with
/// sum_j g_j = 1.
VectorXd rre_coefficients(const DiffWindow& window, int q);

/// sum_j g_j z_{k-j} for weights from rre_coefficients.
VectorXd rre_point(const VectorXd& z_k, const DiffWindow& window,
                   const VectorXd& weights);

/// z_k - (v_k + ... + v_{k-j+1}); requires j <= window.count().
VectorXd past_iterate(const VectorXd& z_k, const DiffWindow& window, int j);

/// B_s = sum_{l=1}^s |M^l| |sum_{i=0}^{s-l} (C^i)_(1,1)|, with
/// `m_power_norms[l-1] = |M^l|`.
double fitting_error_bound(const CompanionFit& fit,
                           const std::vector<double>& m_power_norms, int s);

/// B_inf = |1 - sum c|^{-1} |M| / (1 - |M|). Throws DivergentSeries unless
/// |M| < 1 and rho(C) < 1.
double fitting_error_bound_infinite(const CompanionFit& fit, double m_norm);

}  // namespace a3dmm
