#pragma once

#include <Eigen/Cholesky>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "a3dmm/linear_map.hpp"

namespace a3dmm {

// ---------------------------------------------------------------------------
// Closed-form proximal maps and projections
// ---------------------------------------------------------------------------

/// sign(w_i) * max(|w_i| - tau, 0).
VectorXd soft_threshold_l1(const VectorXd& w, double tau);

using Groups = std::vector<std::vector<Index>>;

/// Consecutive blocks of `block` indices covering [0, n).
Groups contiguous_groups(Index n, Index block);

/// Block soft thresholding, w_g * max(1 - tau/|w_g|, 0). Zero-norm groups map
/// to zero. Throws OverlappingGroups unless `groups` partitions [0, w.size()).
VectorXd prox_group_l12(const VectorXd& w, const Groups& groups, double tau);

/// Singular value soft thresholding with a full (thin) SVD.
MatrixXd prox_nuclear(const MatrixXd& w, double tau);

VectorXd project_box(const VectorXd& w, const VectorXd& lo, const VectorXd& hi);

/// Factorization handle for projecting onto {x : Kx = f}. Built once per
/// problem; immutable and shareable across threads afterwards.
class AffineProjector {
 public:
  AffineProjector(MatrixXd k, VectorXd f);

  VectorXd project(const VectorXd& w) const;

  const MatrixXd& matrix() const { return state_->k; }
  const VectorXd& rhs() const { return state_->f; }

 private:
  struct State {
    MatrixXd k;
    VectorXd f;
    Eigen::LLT<MatrixXd> kkt;
  };
  std::shared_ptr<const State> state_;
};

/// w - K^T (K K^T)^{-1} (K w - f) using the cached factorization.
VectorXd project_affine(const VectorXd& w, const AffineProjector& cache);

/// Cached solver for (Q + gamma I) x = gamma w - q. Factorizations are keyed on
/// gamma, built on first use and never modified afterwards.
class RegularizedQuadratic {
 public:
  explicit RegularizedQuadratic(MatrixXd q_matrix);

  VectorXd solve(const VectorXd& q, double gamma, const VectorXd& w) const;

  const MatrixXd& matrix() const { return state_->q; }

 private:
  using Factor = Eigen::LLT<MatrixXd>;
  const Factor& factor(double gamma) const;

  struct State {
    MatrixXd q;
    mutable std::mutex mutex;
    mutable std::map<double, std::shared_ptr<const Factor>> factors;
  };
  std::shared_ptr<State> state_;
};

VectorXd solve_regularized_quadratic(const RegularizedQuadratic& cache,
                                     const VectorXd& q, double gamma,
                                     const VectorXd& w);

// ---------------------------------------------------------------------------
// Subproblem oracles
// ---------------------------------------------------------------------------

/// argmin_x f(x) + (gamma/2) |M x - w|^2 for a fixed f and fixed map M.
struct ProxOracle {
  using Evaluate = std::function<VectorXd(const VectorXd& w, double gamma)>;
  using Value = std::function<double(const VectorXd& x)>;

  std::string name;
  LinearMap map;
  Evaluate evaluate_fn;
  /// f(x); indicator functions report 0 (they are only evaluated at
  /// points returned by their own projection).
  Value value_fn;

  Index dim() const { return map.cols(); }
  VectorXd evaluate(const VectorXd& w, double gamma) const;
  double value(const VectorXd& x) const;
};

/// prox_{gamma f*}(z) = z - gamma prox_{f/gamma}(z / gamma). Requires an oracle
/// whose map is the identity.
VectorXd moreau_conjugate_prox(const ProxOracle& prox, const VectorXd& z,
                               double gamma);

namespace oracles {

ProxOracle zero(Index n);
/// Indicator of {0}.
ProxOracle origin(Index n);
ProxOracle l1(Index n, double mu);
ProxOracle group_l12(Groups groups, Index n, double mu);
/// Nuclear norm of a column-major vectorized `rows x cols` matrix.
ProxOracle nuclear(Index rows, Index cols, double mu);
ProxOracle box(VectorXd lo, VectorXd hi);
ProxOracle affine(AffineProjector projector);
/// (1/2) x^T Q x + <q, x>.
ProxOracle quadratic(RegularizedQuadratic cache, VectorXd q);
/// Orthogonal projection onto span(basis); basis columns orthonormal.
ProxOracle subspace(MatrixXd basis);
/// Same function composed with the map -I: evaluates the inner oracle at -w.
ProxOracle negated(ProxOracle inner);

}  // namespace oracles

/// Subproblem argmin_x f(x) + (gamma/2)|A x - w|^2 solved approximately by an
/// accelerated proximal gradient method, for maps A without a closed form.
struct IterativeProx {
  ProxOracle simple;  ///< prox of f with identity map
  LinearMap map;      ///< A
  double map_norm_sq = 1.0;

  struct Outcome {
    VectorXd x;
    int steps = 0;
    double initial_objective = 0.0;
    double final_objective = 0.0;
  };

  /// Runs `max_steps` iterations from `warm` (fewer if `tol > 0` and the
  /// iterate moves less than tol).
  Outcome solve(const VectorXd& w, double gamma, const VectorXd& warm,
                int max_steps, double tol) const;

  double objective(const VectorXd& x, const VectorXd& w, double gamma) const;
};

}  // namespace a3dmm
