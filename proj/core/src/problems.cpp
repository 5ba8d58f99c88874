#include "a3dmm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "a3dmm/error.hpp"
#include "a3dmm/trace.hpp"

namespace a3dmm {

MatrixXd gaussian_matrix(Index m, Index n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(double(m)));
  MatrixXd k(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) k(i, j) = gauss(rng);
    const double norm = k.col(j).norm();
    if (norm > 0.0) k.col(j) /= norm;
  }
  return k;
}

VectorXd sparse_vector(Index n, Index nnz, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::normal_distribution<double> gauss;
  VectorXd x = VectorXd::Zero(n);
  // Partial Fisher-Yates keeps the draw order independent of the stdlib.
  for (Index i = 0; i < nnz; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
    x(idx[i]) = gauss(rng);
  }
  return x;
}

namespace {

std::string fmt(double x) { return format_double(x); }

SplitProblem lasso_split(const MatrixXd& k, const VectorXd& f, double mu) {
  const Index n = k.cols();
  RegularizedQuadratic cache(k.transpose() * k);
  ProxOracle quad = oracles::quadratic(cache, -(k.transpose() * f));
  const double offset = 0.5 * f.squaredNorm();
  auto inner_value = quad.value_fn;
  quad.value_fn = [inner_value, offset](const VectorXd& y) {
    return inner_value(y) + offset;
  };
  quad.name = "least-squares";
  SplitProblem sp{oracles::l1(n, mu), oracles::negated(std::move(quad)),
                  VectorXd::Zero(n), std::nullopt};
  return sp;
}

}  // namespace

ProblemInstance make_lasso(Index m, Index n, Index sparsity, double mu,
                           std::uint64_t seed) {
  if (m < 1 || n <= m || sparsity < 1 || sparsity >= m) {
    throw Error(Errc::BadShape, "lasso needs 1 <= sparsity < m < n, got (" +
                                    std::to_string(m) + ", " +
                                    std::to_string(n) + ", " +
                                    std::to_string(sparsity) + ")");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw Error(Errc::InvalidArgument, "lasso mu must be finite and > 0");
  }
  Rng rng(seed);
  const MatrixXd k = gaussian_matrix(m, n, rng);
  const VectorXd x = sparse_vector(n, sparsity, rng);
  const VectorXd f = k * x;
  ProblemInstance inst =
      make_lasso(k, f, mu,
                 "lasso m=" + std::to_string(m) + " n=" + std::to_string(n) +
                     " sparsity=" + std::to_string(sparsity) +
                     " mu=" + fmt(mu));
  inst.seed = seed;
  inst.ground_truth = x;
  return inst;
}

ProblemInstance make_lasso(const MatrixXd& k, const VectorXd& f, double mu,
                           std::string descriptor) {
  if (k.rows() != f.size()) {
    throw Error(Errc::BadShape, "design rows and response length differ");
  }
  ProblemInstance inst;
  inst.problem = lasso_split(k, f, mu);
  inst.descriptor = std::move(descriptor);
  inst.k_norm_sq = operator_norm_squared(LinearMap::dense(k));
  inst.default_gamma = inst.k_norm_sq + 0.1;
  return inst;
}

ProblemInstance make_lasso_libsvm(const LibsvmData& data, double mu) {
  MatrixXd k = data.features.to_dense();
  for (Index j = 0; j < k.cols(); ++j) {
    const double s = k.col(j).cwiseAbs().maxCoeff();
    if (s > 0.0) k.col(j) /= s;
  }
  return make_lasso(k, data.labels, mu,
                    "lasso-libsvm rows=" + std::to_string(k.rows()) +
                        " cols=" + std::to_string(k.cols()) + " mu=" + fmt(mu));
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::L1: return "l1";
    case Regularizer::L12: return "l12";
    case Regularizer::Nuclear: return "nuclear";
  }
  return "l1";
}

Regularizer parse_regularizer(const std::string& text) {
  if (text == "l1") return Regularizer::L1;
  if (text == "l12") return Regularizer::L12;
  if (text == "nuclear") return Regularizer::Nuclear;
  throw Error(Errc::InvalidArgument, "unknown regularizer '" + text + "'");
}

AffineShape AffineShape::desk(Regularizer r) {
  AffineShape s;
  if (r == Regularizer::L12) s.sparsity = 8;
  return s;
}

ProblemInstance make_affine_constrained(Regularizer reg,
                                        const AffineShape& shape,
                                        std::uint64_t seed) {
  Rng rng(seed);
  ProblemInstance inst;
  inst.seed = seed;
  MatrixXd k;
  VectorXd x;
  ProxOracle r;
  switch (reg) {
    case Regularizer::L1: {
      if (shape.m < 1 || shape.n <= shape.m || shape.sparsity < 1 ||
          shape.sparsity >= shape.m) {
        throw Error(Errc::BadShape, "l1 needs 1 <= sparsity < m < n");
      }
      k = gaussian_matrix(shape.m, shape.n, rng);
      x = sparse_vector(shape.n, shape.sparsity, rng);
      r = oracles::l1(shape.n, 1.0);
      inst.descriptor = "affine-l1 m=" + std::to_string(shape.m) +
                        " n=" + std::to_string(shape.n) +
                        " sparsity=" + std::to_string(shape.sparsity);
      break;
    }
    case Regularizer::L12: {
      if (shape.block < 1 || shape.n % shape.block != 0 || shape.m < 1 ||
          shape.n <= shape.m || shape.sparsity < 1 ||
          shape.sparsity * shape.block >= shape.m) {
        throw Error(Errc::BadShape,
                    "l12 needs block | n and blocks * block < m < n");
      }
      k = gaussian_matrix(shape.m, shape.n, rng);
      const Index nblocks = shape.n / shape.block;
      const VectorXd pick = sparse_vector(nblocks, shape.sparsity, rng);
      std::normal_distribution<double> gauss;
      x = VectorXd::Zero(shape.n);
      for (Index g = 0; g < nblocks; ++g) {
        if (pick(g) == 0.0) continue;
        for (Index i = 0; i < shape.block; ++i) {
          x(g * shape.block + i) = gauss(rng);
        }
      }
      r = oracles::group_l12(contiguous_groups(shape.n, shape.block), shape.n,
                             1.0);
      inst.descriptor = "affine-l12 m=" + std::to_string(shape.m) +
                        " n=" + std::to_string(shape.n) + " blocks=" +
                        std::to_string(shape.sparsity) + "x" +
                        std::to_string(shape.block);
      break;
    }
    case Regularizer::Nuclear: {
      const Index n = shape.rows * shape.cols;
      if (shape.rank < 1 || shape.rank > std::min(shape.rows, shape.cols) ||
          shape.measurements < 1 || shape.measurements >= n) {
        throw Error(Errc::BadShape,
                    "nuclear needs 1 <= rank <= min(rows, cols) and fewer "
                    "measurements than entries");
      }
      k = gaussian_matrix(shape.measurements, n, rng);
      std::normal_distribution<double> gauss;
      MatrixXd left(shape.rows, shape.rank);
      MatrixXd right(shape.cols, shape.rank);
      for (Index i = 0; i < left.size(); ++i) left.data()[i] = gauss(rng);
      for (Index i = 0; i < right.size(); ++i) right.data()[i] = gauss(rng);
      const MatrixXd low_rank = left * right.transpose();
      x = Eigen::Map<const VectorXd>(low_rank.data(), n);
      r = oracles::nuclear(shape.rows, shape.cols, 1.0);
      inst.descriptor = "affine-nuclear " + std::to_string(shape.rows) + "x" +
                        std::to_string(shape.cols) +
                        " rank=" + std::to_string(shape.rank) +
                        " measurements=" + std::to_string(shape.measurements);
      break;
    }
  }
  const VectorXd f = k * x;
  const Index n = k.cols();
  inst.k_norm_sq = operator_norm_squared(LinearMap::dense(k));
  inst.problem = SplitProblem{
      std::move(r),
      oracles::negated(oracles::affine(AffineProjector(k, f))),
      VectorXd::Zero(n), std::nullopt};
  inst.ground_truth = x;
  inst.default_gamma = 1.0;
  return inst;
}

ProblemInstance make_qp_box(Index n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::BadShape, "qp needs n >= 1");
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd g(n, n);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
  g /= std::sqrt(double(n));
  const MatrixXd qm =
      g.transpose() * g + 0.1 * MatrixXd::Identity(n, n);
  VectorXd q(n), lo(n), hi(n);
  for (Index i = 0; i < n; ++i) q(i) = gauss(rng);
  for (Index i = 0; i < n; ++i) {
    lo(i) = -0.1 - unit(rng);
    hi(i) = 0.1 + unit(rng);
  }
  ProblemInstance inst = make_qp_box(qm, q, lo, hi);
  inst.seed = seed;
  inst.descriptor = "qp-box n=" + std::to_string(n);
  return inst;
}

ProblemInstance make_qp_box(const MatrixXd& q_matrix, const VectorXd& q,
                            const VectorXd& lo, const VectorXd& hi) {
  const Index n = q_matrix.rows();
  if (q_matrix.cols() != n || q.size() != n || lo.size() != n ||
      hi.size() != n) {
    throw Error(Errc::BadShape, "qp data sizes disagree");
  }
  ProblemInstance inst;
  inst.problem = SplitProblem{
      oracles::quadratic(RegularizedQuadratic(q_matrix), q),
      oracles::negated(oracles::box(lo, hi)), VectorXd::Zero(n),
      std::nullopt};
  inst.descriptor = "qp-box n=" + std::to_string(n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q_matrix,
                                              Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  inst.default_gamma = lmin > 0.0 ? std::sqrt(lmin * lmax) : 1.0;
  return inst;
}

ProblemInstance make_feasibility(double alpha, std::uint64_t seed) {
  const double half_pi = std::acos(0.0);
  if (!(alpha > 0.0 && alpha <= half_pi + 1e-15)) {
    throw Error(Errc::InvalidArgument, "alpha must lie in ]0, pi/2]");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 4.0 * half_pi);
  const double phi = angle(rng);
  MatrixXd t1(2, 1), t2(2, 1);
  t1 << std::cos(phi), std::sin(phi);
  t2 << std::cos(phi + alpha), std::sin(phi + alpha);
  const double start = angle(rng);
  VectorXd z0(2);
  z0 << std::cos(start), std::sin(start);

  ProblemInstance inst;
  inst.problem = SplitProblem{oracles::subspace(t1),
                              oracles::negated(oracles::subspace(t2)),
                              VectorXd::Zero(2), std::nullopt};
  inst.descriptor = "feasibility alpha=" + fmt(alpha);
  inst.seed = seed;
  inst.z0 = z0;
  inst.ground_truth = VectorXd::Zero(2);
  inst.reference = Reference{VectorXd::Zero(2), VectorXd::Zero(2)};
  inst.t_ar = t1;
  inst.t_bj = t2;
  inst.default_gamma = 1.0;
  return inst;
}

MatrixXd piecewise_constant_image(Index rows, Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw Error(Errc::BadShape, "empty image");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd img = MatrixXd::Constant(rows, cols, 0.2 + 0.2 * unit(rng));
  for (int shape = 0; shape < 6; ++shape) {
    const double level = 0.1 + 0.8 * unit(rng);
    const double cr = unit(rng) * double(rows);
    const double cc = unit(rng) * double(cols);
    const double hr = (0.1 + 0.2 * unit(rng)) * double(rows);
    const double hc = (0.1 + 0.2 * unit(rng)) * double(cols);
    const bool disc = shape % 2 == 1;
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) {
        const double dr = (double(r) - cr) / hr;
        const double dc = (double(c) - cc) / hc;
        const bool inside = disc ? dr * dr + dc * dc <= 1.0
                                 : std::abs(dr) <= 1.0 && std::abs(dc) <= 1.0;
        if (inside) img(r, c) = level;
      }
    }
  }
  return img;
}

ProblemInstance make_tv_inpainting(const MatrixXd& image, double density,
                                   std::uint64_t seed) {
  if (image.size() == 0) throw Error(Errc::BadImage, "empty image");
  if (image.minCoeff() < 0.0 || image.maxCoeff() > 1.0 ||
      !image.allFinite()) {
    throw Error(Errc::BadImage, "pixel values must lie in [0,1]");
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw Error(Errc::InvalidArgument, "mask density must lie in ]0,1]");
  }
  const Index rows = image.rows();
  const Index cols = image.cols();
  const Index n = rows * cols;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  VectorXd mask(n);
  for (Index i = 0; i < n; ++i) mask(i) = unit(rng) < density ? 1.0 : 0.0;
  const VectorXd truth = Eigen::Map<const VectorXd>(image.data(), n);
  const VectorXd observed = mask.cwiseProduct(truth);

  auto data = std::make_shared<const std::pair<VectorXd, VectorXd>>(mask,
                                                                    observed);
  // Projection onto {x : x_i = f_i on the mask}.
  ProxOracle omega{
      "observed", LinearMap::identity(n),
      [data](const VectorXd& w, double) -> VectorXd {
        const auto& [m, f] = *data;
        return f + (VectorXd::Ones(m.size()) - m).cwiseProduct(w);
      },
      [](const VectorXd&) { return 0.0; }};

  const LinearMap grad = LinearMap::gradient2d(rows, cols);
  IterativeProx iterative{omega, grad, 8.0};
  // Stand-alone closed-form slot: a fixed inner budget from the fill-in of
  // the observed pixels. run_inexact replaces this with a warm start.
  ProxOracle r{"observed o grad", grad,
               [iterative, data](const VectorXd& w, double gamma) {
                 return iterative.solve(w, gamma, data->second, 200, 0.0).x;
               },
               [](const VectorXd&) { return 0.0; }};

  ProblemInstance inst;
  inst.problem = SplitProblem{std::move(r),
                              oracles::negated(oracles::l1(2 * n, 1.0)),
                              VectorXd::Zero(2 * n), iterative};
  inst.descriptor = "tv-inpainting " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " density=" + fmt(density);
  inst.seed = seed;
  inst.ground_truth = truth;
  inst.image = image;
  inst.mask = mask;
  inst.k_norm_sq = 8.0;
  inst.default_gamma = 1.0;
  return inst;
}

MatrixXd unvec_image(const VectorXd& x, Index rows, Index cols) {
  if (x.size() != rows * cols) throw Error(Errc::BadShape, "image size");
  return Eigen::Map<const MatrixXd>(x.data(), rows, cols);
}

double psnr(const MatrixXd& estimate, const MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw Error(Errc::DimensionMismatch, "psnr image sizes");
  }
  const double mse = (estimate - truth).squaredNorm() / double(truth.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double kkt_residual(const SplitProblem& problem, const IterateState& state,
                    double gamma) {
  const VectorXd primal = problem.a().apply(state.x) +
                          problem.b_map().apply(state.y) - problem.b;
  const IterateState next = admm_step(problem, state, gamma);
  return primal.norm() + next.v.norm();
}

const Reference& compute_reference(ProblemInstance& inst,
                                   const ReferenceOptions& options) {
  SolverConfig cfg;
  cfg.gamma = options.gamma;
  cfg.tol = options.tol;
  cfg.max_iter = options.max_iter;
  RunOptions run;
  run.z0 = inst.z0;
  run.keep_trace = false;
  const RunResult res =
      run_a3dmm(inst.problem, cfg, ExtrapConfig::disabled(), run);
  inst.reference = Reference{res.state.z, res.state.x};
  return *inst.reference;
}

}  // namespace a3dmm
