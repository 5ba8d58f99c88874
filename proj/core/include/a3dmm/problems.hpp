#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "a3dmm/accel.hpp"
#include "a3dmm/data_io.hpp"
#include "a3dmm/splitting.hpp"

namespace a3dmm {

using Rng = std::mt19937_64;

struct ProblemInstance {
  SplitProblem problem;
  std::string descriptor;
  std::uint64_t seed = 0;
  /// Starting point for the fixed-point variable (zero when unset).
  std::optional<VectorXd> z0;
  /// Planted solution of the synthetic model, when there is one.
  std::optional<VectorXd> ground_truth;
  /// Filled by compute_reference.
  std::optional<Reference> reference;
  /// |K|^2 for problems with a measurement matrix, 1 otherwise.
  double k_norm_sq = 1.0;
  /// Step size the instance was designed for.
  double default_gamma = 1.0;

  /// Subspace bases for polyhedral feasibility instances.
  std::optional<MatrixXd> t_ar;
  std::optional<MatrixXd> t_bj;

  /// Inpainting data: clean image, observation mask (1 = observed).
  std::optional<MatrixXd> image;
  std::optional<VectorXd> mask;
};

/// Gaussian m x n matrix with N(0, 1/m) entries and unit-norm columns.
MatrixXd gaussian_matrix(Index m, Index n, Rng& rng);
/// Vector with `nnz` N(0,1) entries at random positions.
VectorXd sparse_vector(Index n, Index nnz, Rng& rng);

inline constexpr double kDeskLassoMu = 0.1;

/// min mu |x|_1 + 1/2 |K y - f|^2  s.t.  x - y = 0, f = K x_true.
ProblemInstance make_lasso(Index m = 64, Index n = 256, Index sparsity = 13,
                           double mu = kDeskLassoMu, std::uint64_t seed = 1);

/// LASSO with a given design; used for LIBSVM data.
ProblemInstance make_lasso(const MatrixXd& k, const VectorXd& f, double mu,
                           std::string descriptor);

/// LASSO on LIBSVM data: columns scaled by their max-abs value, mu = 1.
ProblemInstance make_lasso_libsvm(const LibsvmData& data, double mu = 1.0);

enum class Regularizer { L1, L12, Nuclear };

std::string to_string(Regularizer r);
Regularizer parse_regularizer(const std::string& text);

struct AffineShape {
  Index m = 64;
  Index n = 256;
  /// Nonzeros (l1) or nonzero blocks (l12).
  Index sparsity = 13;
  Index block = 4;
  /// Matrix variable for the nuclear norm.
  Index rows = 24;
  Index cols = 24;
  Index rank = 2;
  Index measurements = 300;

  static AffineShape desk(Regularizer r);
};

/// min R(x) s.t. K x = f, split as R(x) + i_{Kx=f}(y) with x - y = 0.
ProblemInstance make_affine_constrained(Regularizer reg,
                                        const AffineShape& shape,
                                        std::uint64_t seed = 1);

/// min 1/2 x^T Q x + <q, x> s.t. lo <= x <= hi. The default step size is
/// sqrt(lambda_min(Q) lambda_max(Q)).
ProblemInstance make_qp_box(Index n, std::uint64_t seed = 1);
ProblemInstance make_qp_box(const MatrixXd& q_matrix, const VectorXd& q,
                            const VectorXd& lo, const VectorXd& hi);

/// Two lines through the origin of R^2 at angle alpha; find their common
/// point. The starting point is seeded and nonzero.
ProblemInstance make_feasibility(double alpha, std::uint64_t seed = 1);

/// Random rectangles and discs on a flat background, values in [0,1].
MatrixXd piecewise_constant_image(Index rows, Index cols, std::uint64_t seed);

/// min |grad x|_1 s.t. x_i = image_i on a Bernoulli(density) mask.
ProblemInstance make_tv_inpainting(const MatrixXd& image, double density,
                                   std::uint64_t seed = 1);

/// Image (rows x cols) from a column-major vector.
MatrixXd unvec_image(const VectorXd& x, Index rows, Index cols);
double psnr(const MatrixXd& estimate, const MatrixXd& truth);

/// |A x + B y - b| + |T(z) - z| at the given state.
double kkt_residual(const SplitProblem& problem, const IterateState& state,
                    double gamma);

struct ReferenceOptions {
  double gamma = 1.0;
  double tol = 1e-12;
  int max_iter = 100000;
};

/// Long standard-ADMM run from the instance's z0; stores and returns z*, x*.
const Reference& compute_reference(ProblemInstance& inst,
                                   const ReferenceOptions& options);

}  // namespace a3dmm
