#pragma once

#include <optional>
#include <string>

#include "a3dmm/prox.hpp"

namespace a3dmm {

/// min R(x) + J(y)  s.t.  A x + B y = b.
///
/// `prox_r` carries A as its map and `prox_j` carries B. The x-subproblem may
/// alternatively be exposed as an iterative solver (`iterative_r`) for maps
/// without a closed-form subproblem.
struct SplitProblem {
  ProxOracle prox_r;
  ProxOracle prox_j;
  VectorXd b;
  std::optional<IterativeProx> iterative_r;

  const LinearMap& a() const { return prox_r.map; }
  const LinearMap& b_map() const { return prox_j.map; }
  Index n() const { return prox_r.dim(); }
  Index m() const { return prox_j.dim(); }
  Index p() const { return b.size(); }

  /// Throws DimensionMismatch unless A: R^n -> R^p and B: R^m -> R^p.
  void validate() const;
  double objective(const VectorXd& x, const VectorXd& y) const;
};

/// Four-point state in step order (y, psi, x, z). After a step from the
/// point zbar: psi = zbar + gamma (B y - b) and z = psi + gamma A x (standard
/// variant); v = z - z_prev where z_prev is the raw z before the step.
struct IterateState {
  VectorXd x, y, psi, z, v;
  int k = 0;
  /// |v_1|, recorded on the first step; used by the divergence detector.
  double first_step_norm = 0.0;

  static IterateState initial(const SplitProblem& problem,
                              const std::optional<VectorXd>& z0 = {});
};

enum class Variant { Standard, Relaxed, Symmetric };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);

struct SolverConfig {
  double gamma = 1.0;
  double phi = 1.0;
  Variant variant = Variant::Standard;
  double tol = 1e-10;
  int max_iter = 1000;

  void validate() const;
};

IterateState admm_step(const SplitProblem& problem, const IterateState& state,
                       const VectorXd& zbar, double gamma);
IterateState admm_step(const SplitProblem& problem, const IterateState& state,
                       double gamma);

/// Over-relaxed step; throws BadRelaxation unless 0 < phi < 2.
IterateState relaxed_step(const SplitProblem& problem,
                          const IterateState& state, const VectorXd& zbar,
                          double gamma, double phi);
IterateState relaxed_step(const SplitProblem& problem,
                          const IterateState& state, double gamma, double phi);

/// Symmetric (Peaceman-Rachford) step; throws Divergence once |v_k| exceeds
/// 1e6 * |v_1|.
IterateState symmetric_step(const SplitProblem& problem,
                            const IterateState& state, const VectorXd& zbar,
                            double gamma);
IterateState symmetric_step(const SplitProblem& problem,
                            const IterateState& state, double gamma);

/// Dispatches on `config.variant`.
IterateState variant_step(const SplitProblem& problem,
                          const IterateState& state, const VectorXd& zbar,
                          const SolverConfig& config);

inline constexpr double kDivergenceFactor = 1e6;

/// z_k + a (z_k - z_{k-1}) + b (z_{k-1} - z_{k-2}).
VectorXd inertial_predict(const VectorXd& z_k, const VectorXd& z_km1,
                          const std::optional<VectorXd>& z_km2, double a,
                          double b = 0.0);

struct DualStep {
  VectorXd u, z_next, psi;
};

/// One Douglas-Rachford (or, with `peaceman_rachford`, Peaceman-Rachford)
/// iteration on the dual problem, driven only by resolvents of the
/// conjugates. Used to cross-check the primal ADMM z sequence.
DualStep dr_dual_step(const SplitProblem& problem, const VectorXd& z,
                      double gamma, bool peaceman_rachford = false);

/// (I + gamma d(R* o -A^T))^{-1}(w). Uses the Moreau identity when A = +-I.
VectorXd dual_resolvent_r(const SplitProblem& problem, const VectorXd& w,
                          double gamma);
/// (I + gamma d(J* o -B^T))^{-1}(w).
VectorXd dual_resolvent_j(const SplitProblem& problem, const VectorXd& w,
                          double gamma);

}  // namespace a3dmm
