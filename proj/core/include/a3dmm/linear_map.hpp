#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>

namespace a3dmm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrixd = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class MapKind { Identity, NegatedIdentity, Dense, Sparse, Structured };

/// Type-erased linear operator with its adjoint. Copies share the
/// underlying (immutable) data.
class LinearMap {
 public:
  using Apply = std::function<VectorXd(const VectorXd&)>;

  LinearMap() = default;
  LinearMap(Index rows, Index cols, MapKind kind, std::string name,
            Apply apply, Apply apply_adjoint);

  static LinearMap identity(Index n);
  static LinearMap negated_identity(Index n);
  static LinearMap dense(MatrixXd m);
  static LinearMap sparse(SparseMatrixd m);
  /// Forward differences with replicate (Neumann) boundary on a column-major
  /// `rows x cols` image, stacked vertical-then-horizontal.
  static LinearMap gradient2d(Index rows, Index cols);

  VectorXd apply(const VectorXd& v) const;
  VectorXd apply_adjoint(const VectorXd& v) const;

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  MapKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  /// Materializes the operator as a dense matrix (column by column).
  MatrixXd to_dense() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  MapKind kind_ = MapKind::Identity;
  std::string name_;
  Apply apply_;
  Apply adjoint_;
};

/// Largest singular value squared, by power iteration on M^T M.
double operator_norm_squared(const LinearMap& map, double rel_tol = 1e-8,
                             int max_iter = 10000, unsigned seed = 7);

}  // namespace a3dmm
