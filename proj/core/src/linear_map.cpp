#include "a3dmm/linear_map.hpp"

#include <cmath>
#include <random>

#include "a3dmm/error.hpp"

namespace a3dmm {

LinearMap::LinearMap(Index rows, Index cols, MapKind kind, std::string name,
                     Apply apply, Apply apply_adjoint)
    : rows_(rows),
      cols_(cols),
      kind_(kind),
      name_(std::move(name)),
      apply_(std::move(apply)),
      adjoint_(std::move(apply_adjoint)) {}

LinearMap LinearMap::identity(Index n) {
  auto id = [](const VectorXd& v) { return v; };
  return {n, n, MapKind::Identity, "identity", id, id};
}

LinearMap LinearMap::negated_identity(Index n) {
  auto neg = [](const VectorXd& v) -> VectorXd { return -v; };
  return {n, n, MapKind::NegatedIdentity, "-identity", neg, neg};
}

LinearMap LinearMap::dense(MatrixXd m) {
  auto data = std::make_shared<const MatrixXd>(std::move(m));
  return {data->rows(), data->cols(), MapKind::Dense, "dense",
          [data](const VectorXd& v) -> VectorXd { return (*data) * v; },
          [data](const VectorXd& v) -> VectorXd {
            return data->transpose() * v;
          }};
}

LinearMap LinearMap::sparse(SparseMatrixd m) {
  auto data = std::make_shared<const SparseMatrixd>(std::move(m));
  return {data->rows(), data->cols(), MapKind::Sparse, "sparse",
          [data](const VectorXd& v) -> VectorXd { return (*data) * v; },
          [data](const VectorXd& v) -> VectorXd {
            return data->transpose() * v;
          }};
}

LinearMap LinearMap::gradient2d(Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    throw Error(Errc::BadShape, "gradient2d needs a non-empty image");
  }
  const Index n = rows * cols;
  auto forward = [rows, cols, n](const VectorXd& x) -> VectorXd {
    VectorXd g = VectorXd::Zero(2 * n);
    Eigen::Map<const MatrixXd> img(x.data(), rows, cols);
    Eigen::Map<MatrixXd> gv(g.data(), rows, cols);
    Eigen::Map<MatrixXd> gh(g.data() + n, rows, cols);
    if (rows > 1) {
      gv.topRows(rows - 1) = img.bottomRows(rows - 1) - img.topRows(rows - 1);
    }
    if (cols > 1) {
      gh.leftCols(cols - 1) = img.rightCols(cols - 1) - img.leftCols(cols - 1);
    }
    return g;
  };
  auto adjoint = [rows, cols, n](const VectorXd& g) -> VectorXd {
    VectorXd x = VectorXd::Zero(n);
    Eigen::Map<MatrixXd> img(x.data(), rows, cols);
    Eigen::Map<const MatrixXd> gv(g.data(), rows, cols);
    Eigen::Map<const MatrixXd> gh(g.data() + n, rows, cols);
    if (rows > 1) {
      img.bottomRows(rows - 1) += gv.topRows(rows - 1);
      img.topRows(rows - 1) -= gv.topRows(rows - 1);
    }
    if (cols > 1) {
      img.rightCols(cols - 1) += gh.leftCols(cols - 1);
      img.leftCols(cols - 1) -= gh.leftCols(cols - 1);
    }
    return x;
  };
  return {2 * n, n, MapKind::Structured, "gradient2d", forward, adjoint};
}

VectorXd LinearMap::apply(const VectorXd& v) const {
  if (v.size() != cols_) {
    throw Error(Errc::DimensionMismatch,
                name_ + ": apply expects " + std::to_string(cols_) +
                    " entries, got " + std::to_string(v.size()));
  }
  return apply_(v);
}

VectorXd LinearMap::apply_adjoint(const VectorXd& v) const {
  if (v.size() != rows_) {
    throw Error(Errc::DimensionMismatch,
                name_ + ": adjoint expects " + std::to_string(rows_) +
                    " entries, got " + std::to_string(v.size()));
  }
  return adjoint_(v);
}

MatrixXd LinearMap::to_dense() const {
  MatrixXd out(rows_, cols_);
  VectorXd e = VectorXd::Zero(cols_);
  for (Index j = 0; j < cols_; ++j) {
    e(j) = 1.0;
    out.col(j) = apply_(e);
    e(j) = 0.0;
  }
  return out;
}

double operator_norm_squared(const LinearMap& map, double rel_tol,
                             int max_iter, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  VectorXd u(map.cols());
  for (Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
  double nrm = u.norm();
  if (nrm == 0.0) return 0.0;
  u /= nrm;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    VectorXd w = map.apply_adjoint(map.apply(u));
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    u = w / next;
    if (std::abs(next - lambda) <= rel_tol * next) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace a3dmm
