#include "a3dmm/prox.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "a3dmm/error.hpp"

namespace a3dmm {

VectorXd soft_threshold_l1(const VectorXd& w, double tau) {
  if (tau < 0.0) throw Error(Errc::InvalidArgument, "soft threshold tau < 0");
  VectorXd out(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    const double mag = std::abs(w(i)) - tau;
    out(i) = mag > 0.0 ? std::copysign(mag, w(i)) : 0.0;
  }
  return out;
}

Groups contiguous_groups(Index n, Index block) {
  if (block < 1 || n % block != 0) {
    throw Error(Errc::BadShape, "group size must divide the dimension");
  }
  Groups groups;
  for (Index start = 0; start < n; start += block) {
    std::vector<Index> g(static_cast<std::size_t>(block));
    for (Index j = 0; j < block; ++j) g[static_cast<std::size_t>(j)] = start + j;
    groups.push_back(std::move(g));
  }
  return groups;
}

namespace {

void check_partition(const Groups& groups, Index n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Index covered = 0;
  for (const auto& g : groups) {
    for (Index i : g) {
      if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)]) {
        throw Error(Errc::OverlappingGroups,
                    "index " + std::to_string(i) + " repeated or out of range");
      }
      seen[static_cast<std::size_t>(i)] = 1;
      ++covered;
    }
  }
  if (covered != n) {
    throw Error(Errc::OverlappingGroups, "groups do not cover every index");
  }
}

}  // namespace

VectorXd prox_group_l12(const VectorXd& w, const Groups& groups, double tau) {
  if (tau < 0.0) throw Error(Errc::InvalidArgument, "group prox tau < 0");
  check_partition(groups, w.size());
  VectorXd out(w.size());
  for (const auto& g : groups) {
    double sq = 0.0;
    for (Index i : g) sq += w(i) * w(i);
    const double nrm = std::sqrt(sq);
    const double scale = nrm > 0.0 ? std::max(1.0 - tau / nrm, 0.0) : 0.0;
    for (Index i : g) out(i) = scale * w(i);
  }
  return out;
}

MatrixXd prox_nuclear(const MatrixXd& w, double tau) {
  if (tau < 0.0) throw Error(Errc::InvalidArgument, "nuclear prox tau < 0");
  Eigen::BDCSVD<MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(Errc::SvdFailure, "SVD did not converge");
  }
  VectorXd sigma = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
}

VectorXd project_box(const VectorXd& w, const VectorXd& lo,
                     const VectorXd& hi) {
  if (lo.size() != w.size() || hi.size() != w.size()) {
    throw Error(Errc::DimensionMismatch, "box bounds size");
  }
  for (Index i = 0; i < w.size(); ++i) {
    if (lo(i) > hi(i)) {
      throw Error(Errc::EmptyBox, "lo > hi at index " + std::to_string(i));
    }
  }
  return w.cwiseMax(lo).cwiseMin(hi);
}

AffineProjector::AffineProjector(MatrixXd k, VectorXd f) {
  if (k.rows() != f.size()) {
    throw Error(Errc::DimensionMismatch, "affine constraint K and f");
  }
  auto state = std::make_shared<State>();
  state->k = std::move(k);
  state->f = std::move(f);
  MatrixXd gram = state->k * state->k.transpose();
  state->kkt.compute(gram);
  if (state->kkt.info() != Eigen::Success) {
    throw Error(Errc::RankDeficient, "K K^T is not positive definite");
  }
  const auto diag = state->kkt.matrixLLT().diagonal();
  if (diag.minCoeff() <= 1e-7 * diag.maxCoeff()) {
    throw Error(Errc::RankDeficient, "K does not have full row rank");
  }
  state_ = std::move(state);
}

VectorXd AffineProjector::project(const VectorXd& w) const {
  const auto& s = *state_;
  if (w.size() != s.k.cols()) {
    throw Error(Errc::DimensionMismatch, "affine projection input");
  }
  const VectorXd residual = s.k * w - s.f;
  return w - s.k.transpose() * s.kkt.solve(residual);
}

VectorXd project_affine(const VectorXd& w, const AffineProjector& cache) {
  return cache.project(w);
}

RegularizedQuadratic::RegularizedQuadratic(MatrixXd q_matrix)
    : state_(std::make_shared<State>()) {
  if (q_matrix.rows() != q_matrix.cols()) {
    throw Error(Errc::DimensionMismatch, "Q must be square");
  }
  const double asym = (q_matrix - q_matrix.transpose()).cwiseAbs().maxCoeff();
  if (q_matrix.size() > 0 && asym > 1e-10) {
    throw Error(Errc::NotSymmetric,
                "|Q - Q^T|_inf = " + std::to_string(asym));
  }
  state_->q = std::move(q_matrix);
}

const RegularizedQuadratic::Factor& RegularizedQuadratic::factor(
    double gamma) const {
  std::lock_guard lock(state_->mutex);
  auto it = state_->factors.find(gamma);
  if (it == state_->factors.end()) {
    MatrixXd m = state_->q;
    m.diagonal().array() += gamma;
    auto f = std::make_shared<Factor>(m);
    if (f->info() != Eigen::Success) {
      throw Error(Errc::SubproblemFailure, "Q + gamma I not positive definite");
    }
    it = state_->factors.emplace(gamma, std::move(f)).first;
  }
  return *it->second;
}

VectorXd RegularizedQuadratic::solve(const VectorXd& q, double gamma,
                                     const VectorXd& w) const {
  if (!(gamma > 0.0)) throw Error(Errc::InvalidArgument, "gamma must be > 0");
  if (q.size() != state_->q.rows() || w.size() != state_->q.rows()) {
    throw Error(Errc::DimensionMismatch, "regularized quadratic rhs");
  }
  return factor(gamma).solve(gamma * w - q);
}

VectorXd solve_regularized_quadratic(const RegularizedQuadratic& cache,
                                     const VectorXd& q, double gamma,
                                     const VectorXd& w) {
  return cache.solve(q, gamma, w);
}

VectorXd ProxOracle::evaluate(const VectorXd& w, double gamma) const {
  if (w.size() != map.rows()) {
    throw Error(Errc::DimensionMismatch,
                name + ": prox input has " + std::to_string(w.size()) +
                    " entries, expected " + std::to_string(map.rows()));
  }
  return evaluate_fn(w, gamma);
}

double ProxOracle::value(const VectorXd& x) const {
  return value_fn ? value_fn(x) : 0.0;
}

VectorXd moreau_conjugate_prox(const ProxOracle& prox, const VectorXd& z,
                               double gamma) {
  if (prox.map.kind() != MapKind::Identity) {
    throw Error(Errc::InvalidArgument,
                "Moreau identity needs an identity-map oracle");
  }
  return z - gamma * prox.evaluate(z / gamma, gamma);
}

namespace oracles {

namespace {

ProxOracle make(std::string name, Index n, ProxOracle::Evaluate eval,
                ProxOracle::Value value) {
  return ProxOracle{std::move(name), LinearMap::identity(n), std::move(eval),
                    std::move(value)};
}

}  // namespace

ProxOracle zero(Index n) {
  return make(
      "zero", n, [](const VectorXd& w, double) { return w; },
      [](const VectorXd&) { return 0.0; });
}

ProxOracle origin(Index n) {
  return make(
      "origin", n,
      [n](const VectorXd&, double) -> VectorXd { return VectorXd::Zero(n); },
      [](const VectorXd&) { return 0.0; });
}

ProxOracle l1(Index n, double mu) {
  if (!(mu > 0.0)) throw Error(Errc::InvalidArgument, "l1 weight must be > 0");
  return make(
      "l1", n,
      [mu](const VectorXd& w, double gamma) {
        return soft_threshold_l1(w, mu / gamma);
      },
      [mu](const VectorXd& x) { return mu * x.lpNorm<1>(); });
}

ProxOracle group_l12(Groups groups, Index n, double mu) {
  if (!(mu > 0.0)) throw Error(Errc::InvalidArgument, "l12 weight must be > 0");
  check_partition(groups, n);
  auto shared = std::make_shared<const Groups>(std::move(groups));
  return make(
      "l12", n,
      [shared, mu](const VectorXd& w, double gamma) {
        return prox_group_l12(w, *shared, mu / gamma);
      },
      [shared, mu](const VectorXd& x) {
        double total = 0.0;
        for (const auto& g : *shared) {
          double sq = 0.0;
          for (Index i : g) sq += x(i) * x(i);
          total += std::sqrt(sq);
        }
        return mu * total;
      });
}

ProxOracle nuclear(Index rows, Index cols, double mu) {
  if (!(mu > 0.0)) {
    throw Error(Errc::InvalidArgument, "nuclear weight must be > 0");
  }
  return make(
      "nuclear", rows * cols,
      [rows, cols, mu](const VectorXd& w, double gamma) -> VectorXd {
        Eigen::Map<const MatrixXd> mat(w.data(), rows, cols);
        MatrixXd out = prox_nuclear(mat, mu / gamma);
        return Eigen::Map<const VectorXd>(out.data(), out.size());
      },
      [rows, cols, mu](const VectorXd& x) {
        Eigen::Map<const MatrixXd> mat(x.data(), rows, cols);
        Eigen::BDCSVD<MatrixXd> svd(mat);
        return mu * svd.singularValues().sum();
      });
}

ProxOracle box(VectorXd lo, VectorXd hi) {
  if (lo.size() != hi.size()) {
    throw Error(Errc::DimensionMismatch, "box bounds size");
  }
  for (Index i = 0; i < lo.size(); ++i) {
    if (lo(i) > hi(i)) {
      throw Error(Errc::EmptyBox, "lo > hi at index " + std::to_string(i));
    }
  }
  const Index n = lo.size();
  auto bounds = std::make_shared<const std::pair<VectorXd, VectorXd>>(
      std::move(lo), std::move(hi));
  return make(
      "box", n,
      [bounds](const VectorXd& w, double) {
        return project_box(w, bounds->first, bounds->second);
      },
      [](const VectorXd&) { return 0.0; });
}

ProxOracle affine(AffineProjector projector) {
  const Index n = projector.matrix().cols();
  return make(
      "affine", n,
      [projector](const VectorXd& w, double) { return projector.project(w); },
      [](const VectorXd&) { return 0.0; });
}

ProxOracle quadratic(RegularizedQuadratic cache, VectorXd q) {
  const Index n = cache.matrix().rows();
  if (q.size() != n) throw Error(Errc::DimensionMismatch, "quadratic q");
  auto lin = std::make_shared<const VectorXd>(std::move(q));
  return make(
      "quadratic", n,
      [cache, lin](const VectorXd& w, double gamma) {
        return cache.solve(*lin, gamma, w);
      },
      [cache, lin](const VectorXd& x) {
        return 0.5 * x.dot(cache.matrix() * x) + lin->dot(x);
      });
}

ProxOracle subspace(MatrixXd basis) {
  const Index n = basis.rows();
  auto u = std::make_shared<const MatrixXd>(std::move(basis));
  return make(
      "subspace", n,
      [u](const VectorXd& w, double) -> VectorXd {
        return (*u) * (u->transpose() * w);
      },
      [](const VectorXd&) { return 0.0; });
}

ProxOracle negated(ProxOracle inner) {
  if (inner.map.kind() != MapKind::Identity) {
    throw Error(Errc::InvalidArgument, "negated() needs an identity-map oracle");
  }
  const Index n = inner.dim();
  auto shared = std::make_shared<const ProxOracle>(std::move(inner));
  return ProxOracle{
      "-" + shared->name, LinearMap::negated_identity(n),
      [shared](const VectorXd& w, double gamma) {
        return shared->evaluate(-w, gamma);
      },
      [shared](const VectorXd& x) { return shared->value(x); }};
}

}  // namespace oracles

double IterativeProx::objective(const VectorXd& x, const VectorXd& w,
                                double gamma) const {
  return simple.value(x) + 0.5 * gamma * (map.apply(x) - w).squaredNorm();
}

IterativeProx::Outcome IterativeProx::solve(const VectorXd& w, double gamma,
                                            const VectorXd& warm,
                                            int max_steps, double tol) const {
  if (max_steps < 1) throw Error(Errc::InvalidArgument, "max_steps < 1");
  const double lipschitz = gamma * map_norm_sq;
  Outcome out;
  out.x = warm;
  out.initial_objective = objective(warm, w, gamma);
  VectorXd y = warm;
  VectorXd x_prev = warm;
  double t = 1.0;
  for (int j = 0; j < max_steps; ++j) {
    const VectorXd grad = gamma * map.apply_adjoint(map.apply(y) - w);
    out.x = simple.evaluate(y - grad / lipschitz, lipschitz);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = out.x + ((t - 1.0) / t_next) * (out.x - x_prev);
    t = t_next;
    out.steps = j + 1;
    const double moved = (out.x - x_prev).norm();
    x_prev = out.x;
    if (tol > 0.0 && moved <= tol) break;
  }
  out.final_objective = objective(out.x, w, gamma);
  return out;
}

}  // namespace a3dmm
