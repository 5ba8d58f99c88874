#include "a3dmm/splitting.hpp"

#include <cmath>

#include "a3dmm/error.hpp"

namespace a3dmm {

void SplitProblem::validate() const {
  const Index rows = b.size();
  if (a().rows() != rows || b_map().rows() != rows) {
    throw Error(Errc::DimensionMismatch,
                "A is " + std::to_string(a().rows()) + "x" +
                    std::to_string(a().cols()) + ", B is " +
                    std::to_string(b_map().rows()) + "x" +
                    std::to_string(b_map().cols()) + ", b has " +
                    std::to_string(rows) + " entries");
  }
  if (iterative_r && (iterative_r->map.rows() != rows ||
                      iterative_r->map.cols() != n())) {
    throw Error(Errc::DimensionMismatch, "iterative x-subproblem map");
  }
}

double SplitProblem::objective(const VectorXd& x, const VectorXd& y) const {
  return prox_r.value(x) + prox_j.value(y);
}

IterateState IterateState::initial(const SplitProblem& problem,
                                   const std::optional<VectorXd>& z0) {
  IterateState s;
  s.x = VectorXd::Zero(problem.n());
  s.y = VectorXd::Zero(problem.m());
  s.psi = VectorXd::Zero(problem.p());
  s.z = z0 ? *z0 : VectorXd::Zero(problem.p());
  if (s.z.size() != problem.p()) {
    throw Error(Errc::DimensionMismatch, "initial z has wrong size");
  }
  s.v = VectorXd::Zero(problem.p());
  return s;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Standard: return "standard";
    case Variant::Relaxed: return "relaxed";
    case Variant::Symmetric: return "symmetric";
  }
  return "standard";
}

Variant parse_variant(const std::string& text) {
  if (text == "standard") return Variant::Standard;
  if (text == "relaxed") return Variant::Relaxed;
  if (text == "symmetric") return Variant::Symmetric;
  throw Error(Errc::InvalidArgument, "unknown variant '" + text + "'");
}

void SolverConfig::validate() const {
  if (!(gamma > 0.0)) throw Error(Errc::InvalidArgument, "gamma must be > 0");
  if (variant == Variant::Relaxed && !(phi > 0.0 && phi < 2.0)) {
    throw Error(Errc::BadRelaxation, "phi must lie in ]0,2[");
  }
  if (!(tol >= 0.0)) throw Error(Errc::InvalidArgument, "tol must be >= 0");
  if (max_iter < 1) throw Error(Errc::InvalidArgument, "max_iter must be >= 1");
}

namespace {

struct HalfStep {
  VectorXd y, by_minus_b, psi, x, ax;
};

// Shared part of every variant: y-update, multiplier, x-update.
HalfStep half_step(const SplitProblem& problem, const VectorXd& zbar,
                   double gamma) {
  if (!(gamma > 0.0)) throw Error(Errc::InvalidArgument, "gamma must be > 0");
  if (zbar.size() != problem.p()) {
    throw Error(Errc::DimensionMismatch, "z has wrong size");
  }
  HalfStep h;
  h.y = problem.prox_j.evaluate(problem.b - zbar / gamma, gamma);
  h.by_minus_b = problem.b_map().apply(h.y) - problem.b;
  h.psi = zbar + gamma * h.by_minus_b;
  h.x = problem.prox_r.evaluate((zbar - 2.0 * h.psi) / gamma, gamma);
  h.ax = problem.a().apply(h.x);
  return h;
}

IterateState finish(const IterateState& prev, HalfStep&& h, VectorXd z_new) {
  IterateState next;
  next.v = z_new - prev.z;
  next.x = std::move(h.x);
  next.y = std::move(h.y);
  next.psi = std::move(h.psi);
  next.z = std::move(z_new);
  next.k = prev.k + 1;
  next.first_step_norm =
      prev.k == 0 ? next.v.norm() : prev.first_step_norm;
  return next;
}

}  // namespace

IterateState admm_step(const SplitProblem& problem, const IterateState& state,
                       const VectorXd& zbar, double gamma) {
  HalfStep h = half_step(problem, zbar, gamma);
  VectorXd z_new = h.psi + gamma * h.ax;
  return finish(state, std::move(h), std::move(z_new));
}

IterateState admm_step(const SplitProblem& problem, const IterateState& state,
                       double gamma) {
  return admm_step(problem, state, state.z, gamma);
}

IterateState relaxed_step(const SplitProblem& problem,
                          const IterateState& state, const VectorXd& zbar,
                          double gamma, double phi) {
  if (!(phi > 0.0 && phi < 2.0)) {
    throw Error(Errc::BadRelaxation, "phi = " + std::to_string(phi));
  }
  if (phi == 1.0) return admm_step(problem, state, zbar, gamma);
  HalfStep h = half_step(problem, zbar, gamma);
  VectorXd z_new =
      h.psi + gamma * (phi * h.ax - (1.0 - phi) * h.by_minus_b);
  return finish(state, std::move(h), std::move(z_new));
}

IterateState relaxed_step(const SplitProblem& problem,
                          const IterateState& state, double gamma,
                          double phi) {
  return relaxed_step(problem, state, state.z, gamma, phi);
}

IterateState symmetric_step(const SplitProblem& problem,
                            const IterateState& state, const VectorXd& zbar,
                            double gamma) {
  HalfStep h = half_step(problem, zbar, gamma);
  VectorXd z_new = h.psi + gamma * (2.0 * h.ax + h.by_minus_b);
  IterateState next = finish(state, std::move(h), std::move(z_new));
  const double vn = next.v.norm();
  if (!std::isfinite(vn) ||
      (next.first_step_norm > 0.0 &&
       vn > kDivergenceFactor * next.first_step_norm)) {
    throw Error(Errc::Divergence,
                "|v_k| = " + std::to_string(vn) + " at k = " +
                    std::to_string(next.k));
  }
  return next;
}

IterateState symmetric_step(const SplitProblem& problem,
                            const IterateState& state, double gamma) {
  return symmetric_step(problem, state, state.z, gamma);
}

IterateState variant_step(const SplitProblem& problem,
                          const IterateState& state, const VectorXd& zbar,
                          const SolverConfig& config) {
  switch (config.variant) {
    case Variant::Standard:
      return admm_step(problem, state, zbar, config.gamma);
    case Variant::Relaxed:
      return relaxed_step(problem, state, zbar, config.gamma, config.phi);
    case Variant::Symmetric:
      return symmetric_step(problem, state, zbar, config.gamma);
  }
  return admm_step(problem, state, zbar, config.gamma);
}

VectorXd inertial_predict(const VectorXd& z_k, const VectorXd& z_km1,
                          const std::optional<VectorXd>& z_km2, double a,
                          double b) {
  if (a < 0.0) throw Error(Errc::InvalidArgument, "inertial a must be >= 0");
  if (z_km1.size() != z_k.size() || (z_km2 && z_km2->size() != z_k.size())) {
    throw Error(Errc::DimensionMismatch, "inertial history sizes");
  }
  VectorXd out = z_k;
  if (a != 0.0) out += a * (z_k - z_km1);
  if (b != 0.0 && z_km2) out += b * (z_km1 - *z_km2);
  return out;
}

namespace {

// Resolvent of gamma (f* o -M^T) for an oracle of f with map M. For M = +-I
// this is the Moreau identity on f (or on f o -I).
VectorXd conjugate_resolvent(const ProxOracle& oracle, const VectorXd& w,
                             double gamma) {
  switch (oracle.map.kind()) {
    case MapKind::Identity:
      // prox of gamma (f* o -I) at w equals -prox_{gamma f*}(-w).
      return -moreau_conjugate_prox(oracle, -w, gamma);
    case MapKind::NegatedIdentity: {
      // f* o -M^T = f* for M = -I; view the oracle through the identity map.
      ProxOracle plain{oracle.name, LinearMap::identity(oracle.dim()),
                       [&oracle](const VectorXd& u, double g) {
                         return oracle.evaluate(-u, g);
                       },
                       {}};
      return moreau_conjugate_prox(plain, w, gamma);
    }
    default: {
      // u = w + gamma M x with x = argmin f(x) + gamma/2 |M x + w / gamma|^2.
      const VectorXd x = oracle.evaluate(-w / gamma, gamma);
      return w + gamma * oracle.map.apply(x);
    }
  }
}

}  // namespace

VectorXd dual_resolvent_r(const SplitProblem& problem, const VectorXd& w,
                          double gamma) {
  return conjugate_resolvent(problem.prox_r, w, gamma);
}

VectorXd dual_resolvent_j(const SplitProblem& problem, const VectorXd& w,
                          double gamma) {
  return conjugate_resolvent(problem.prox_j, w, gamma);
}

DualStep dr_dual_step(const SplitProblem& problem, const VectorXd& z,
                      double gamma, bool peaceman_rachford) {
  if (!(gamma > 0.0)) throw Error(Errc::InvalidArgument, "gamma must be > 0");
  if (z.size() != problem.p()) {
    throw Error(Errc::DimensionMismatch, "dual step z size");
  }
  DualStep out;
  out.psi = dual_resolvent_j(problem, z - gamma * problem.b, gamma);
  out.u = dual_resolvent_r(problem, 2.0 * out.psi - z, gamma);
  out.z_next = peaceman_rachford ? VectorXd(z + 2.0 * (out.u - out.psi))
                                 : VectorXd(z + out.u - out.psi);
  return out;
}

}  // namespace a3dmm
