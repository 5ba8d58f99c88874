#include "a3dmm/accel.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "a3dmm/error.hpp"
#include "a3dmm/spectra.hpp"

namespace a3dmm {

void ExtrapConfig::validate() const {
  if (q < 1) throw Error(Errc::ConfigError, "extrap.q must be >= 1");
  if (s && *s < 1) throw Error(Errc::ConfigError, "extrap.s must be >= 1");
  if (cadence_offset < 1) {
    throw Error(Errc::ConfigError, "extrap.cadence_offset must be >= 1");
  }
  if (safeguard.enabled) {
    if (!(safeguard.a >= 0.0 && safeguard.a <= 1.0)) {
      throw Error(Errc::ConfigError, "safeguard.a must lie in [0,1]");
    }
    if (safeguard.b && !(*safeguard.b > 0.0)) {
      throw Error(Errc::ConfigError, "safeguard.b must be > 0");
    }
    if (!(safeguard.delta > 0.0)) {
      throw Error(Errc::ConfigError, "safeguard.delta must be > 0");
    }
  }
}

ExtrapConfig ExtrapConfig::disabled() {
  ExtrapConfig e;
  e.enabled = false;
  return e;
}

std::string describe(const ExtrapConfig& extrap) {
  if (!extrap.enabled) return "none";
  return "q=" + std::to_string(extrap.q) +
         ",s=" + (extrap.s ? std::to_string(*extrap.s) : std::string("inf"));
}

double safeguard_coefficient(int k, double a, double b, double delta,
                             double norm_e) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw Error(Errc::InvalidArgument, "safeguard a must lie in [0,1]");
  }
  if (!(b > 0.0) || !(delta > 0.0) || k < 1) {
    throw Error(Errc::InvalidArgument, "safeguard needs b, delta > 0, k >= 1");
  }
  if (norm_e == 0.0) return a;
  const double cap = b / (std::pow(static_cast<double>(k), 1.0 + delta) * norm_e);
  return std::min(a, cap);
}

void InnerSolver::validate() const {
  if (max_inner_steps < 1) {
    throw Error(Errc::ConfigError, "max_inner_steps must be >= 1");
  }
  if (!(tolerance >= 0.0)) {
    throw Error(Errc::ConfigError, "inner tolerance must be >= 0");
  }
}

namespace {

struct Prediction {
  VectorXd zbar;
  bool extrapolated = false;
  double perturbation = 0.0;
};

using Predictor = std::function<Prediction(const IterateState& next,
                                           const IterateState& prev,
                                           const VectorXd& zbar_used)>;

RunResult drive(const SplitProblem& problem, const SolverConfig& config,
                const RunOptions& options, const Predictor& predict) {
  problem.validate();
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  RunResult result;
  IterateState state = IterateState::initial(problem, options.z0);
  VectorXd zbar = state.z;
  VectorXd v_prev;
  const Reference* ref = options.reference;
  if (ref && (ref->z.size() != problem.p() || ref->x.size() != problem.n())) {
    throw Error(Errc::DimensionMismatch, "reference solution size");
  }

  for (int it = 1; it <= config.max_iter; ++it) {
    IterateState next = variant_step(problem, state, zbar, config);
    TraceRecord rec;
    rec.k = next.k;
    rec.norm_v = next.v.norm();
    if (!std::isfinite(rec.norm_v)) {
      throw Error(Errc::Divergence, "non-finite iterate at k = " +
                                        std::to_string(next.k));
    }
    if (v_prev.size() > 0) rec.cos_theta = trajectory_angle(next.v, v_prev);
    if (ref) {
      rec.dist_z = (next.z - ref->z).norm();
      rec.dist_x = (next.x - ref->x).norm();
    }
    const double obj = problem.objective(next.x, next.y);
    if (std::isfinite(obj)) rec.objective = obj;

    const bool done = rec.norm_v <= config.tol;
    Prediction p;
    if (!done) {
      p = predict(next, state, zbar);
    } else {
      p.zbar = next.z;
    }
    rec.extrapolated = p.extrapolated;
    rec.perturbation = p.perturbation;
    rec.ms = std::chrono::duration<double, std::milli>(Clock::now() - start)
                 .count();
    if (p.extrapolated) {
      ++result.extrapolations;
      result.perturbation_sum += p.perturbation;
    }
    if (options.sink) options.sink(rec, next);
    if (options.keep_trace) result.trace.records.push_back(rec);

    v_prev = next.v;
    state = std::move(next);
    zbar = std::move(p.zbar);
    result.iterations = state.k;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

Predictor plain_predictor() {
  return [](const IterateState& next, const IterateState&, const VectorXd&) {
    return Prediction{next.z, false, 0.0};
  };
}

Predictor extrapolation_predictor(const ExtrapConfig& extrap, Index p) {
  auto window = std::make_shared<DiffWindow>(p, extrap.q + 1);
  return [extrap, window](const IterateState& next, const IterateState&,
                          const VectorXd& zbar_used) {
    if (extrap.base == DifferenceBase::Raw) {
      window->push(next.v);
    } else {
      window->push(next.z - zbar_used);
    }
    Prediction out{next.z, false, 0.0};
    if (next.k % extrap.cadence() != 0 || !window->full()) return out;

    const CompanionFit fit = fit_coefficients(*window, extrap.q);
    if (!(fit.rho < 1.0)) return out;
    VectorXd point;
    if (extrap.s) {
      point = extrapolate_finite(next.z, *window, fit, *extrap.s);
    } else if (extrap.rre) {
      try {
        point = rre_point(next.z, *window, rre_coefficients(*window, extrap.q));
      } catch (const Error& e) {
        if (e.code() != Errc::DegenerateConstraint) throw;
        return out;
      }
    } else {
      if (std::abs(1.0 - fit.coeff_sum) <= kNearSingular) return out;
      point = extrapolate_infinite(next.z, *window, fit);
    }
    const VectorXd e = point - next.z;
    const double norm_e = e.norm();
    if (!std::isfinite(norm_e)) return out;

    double a_k = extrap.safeguard.a;
    if (extrap.safeguard.enabled) {
      const double b =
          extrap.safeguard.b.value_or(1e6 * next.first_step_norm);
      if (b > 0.0) {
        const double scale = extrap.safeguard.rule == SafeguardRule::Increment
                                 ? norm_e
                                 : next.v.norm();
        a_k = safeguard_coefficient(next.k, extrap.safeguard.a, b,
                                    extrap.safeguard.delta, scale);
      } else {
        a_k = 0.0;
      }
    }
    out.zbar = next.z + a_k * e;
    out.extrapolated = true;
    out.perturbation = a_k * norm_e;
    return out;
  };
}

void describe_run(Trace& trace, const std::string& solver,
                  const SolverConfig& config) {
  trace.set_meta("solver", solver);
  trace.set_meta("variant", to_string(config.variant));
  trace.set_meta("gamma", format_double(config.gamma));
  trace.set_meta("phi", format_double(config.phi));
}

std::string extrap_solver_id(const ExtrapConfig& extrap) {
  if (!extrap.enabled) return "admm";
  return "a3dmm:" + std::to_string(extrap.q) + ":" +
         (extrap.s ? std::to_string(*extrap.s) : std::string("inf"));
}

}  // namespace

RunResult run_variant(const SplitProblem& problem, const SolverConfig& config,
                      const ExtrapConfig& extrap, const RunOptions& options) {
  Predictor predict = plain_predictor();
  if (extrap.enabled) {
    extrap.validate();
    predict = extrapolation_predictor(extrap, problem.p());
  }
  RunResult r = drive(problem, config, options, predict);
  describe_run(r.trace, extrap_solver_id(extrap), config);
  r.trace.set_meta("q", extrap.enabled ? std::to_string(extrap.q) : "");
  r.trace.set_meta("s", extrap.enabled ? (extrap.s ? std::to_string(*extrap.s)
                                                   : std::string("inf"))
                                       : "");
  return r;
}

RunResult run_a3dmm(const SplitProblem& problem, const SolverConfig& config,
                    const ExtrapConfig& extrap, const RunOptions& options) {
  SolverConfig standard = config;
  standard.variant = Variant::Standard;
  return run_variant(problem, standard, extrap, options);
}

RunResult run_inertial(const SplitProblem& problem, const SolverConfig& config,
                       const InertialConfig& inertial,
                       const RunOptions& options) {
  if (!(inertial.a >= 0.0)) {
    throw Error(Errc::ConfigError, "inertial a must be >= 0");
  }
  // History of raw z: z_{k-1}, z_{k-2}.
  struct History {
    std::optional<VectorXd> older;
  };
  auto hist = std::make_shared<History>();
  Predictor predict = [inertial, hist](const IterateState& next,
                                       const IterateState& prev,
                                       const VectorXd&) {
    Prediction out;
    out.zbar =
        inertial_predict(next.z, prev.z, hist->older, inertial.a, inertial.b);
    out.perturbation = (out.zbar - next.z).norm();
    hist->older = prev.z;
    return out;
  };
  RunResult r = drive(problem, config, options, predict);
  const std::string id =
      inertial.b == 0.0
          ? "iadmm:" + format_double(inertial.a)
          : "iadmm3:" + format_double(inertial.a) + ":" +
                format_double(inertial.b);
  describe_run(r.trace, id, config);
  return r;
}

SplitProblem with_inexact_subproblem(const SplitProblem& problem,
                                     const InnerSolver& inner) {
  inner.validate();
  if (!problem.iterative_r) {
    throw Error(Errc::InvalidArgument,
                "problem does not expose an iterative x-subproblem");
  }
  struct Warm {
    VectorXd x;
  };
  auto warm = std::make_shared<Warm>();
  const IterativeProx solver = *problem.iterative_r;
  const Index n = problem.n();
  SplitProblem out = problem;
  out.prox_r.name = problem.prox_r.name + "/inexact";
  out.prox_r.evaluate_fn = [solver, inner, warm, n](const VectorXd& w,
                                                    double gamma) {
    const VectorXd start = inner.warm == WarmStart::Previous && warm->x.size() == n
                               ? warm->x
                               : VectorXd(VectorXd::Zero(n));
    auto res = solver.solve(w, gamma, start, inner.max_inner_steps,
                            inner.tolerance);
    if (!std::isfinite(res.final_objective) ||
        res.final_objective - res.initial_objective >
            1e6 * (1.0 + std::abs(res.initial_objective))) {
      throw Error(Errc::SubproblemFailure,
                  "inner objective rose from " +
                      format_double(res.initial_objective) + " to " +
                      format_double(res.final_objective));
    }
    warm->x = res.x;
    return res.x;
  };
  return out;
}

RunResult run_inexact(const SplitProblem& problem, const InnerSolver& inner,
                      const SolverConfig& config, const ExtrapConfig& extrap,
                      const RunOptions& options) {
  const SplitProblem inexact = with_inexact_subproblem(problem, inner);
  RunResult r = run_variant(inexact, config, extrap, options);
  r.trace.set_meta("inner_steps", std::to_string(inner.max_inner_steps));
  return r;
}

}  // namespace a3dmm
