#pragma once

#include <functional>
#include <optional>
#include <string>

#include "a3dmm/extrapolate.hpp"
#include "a3dmm/splitting.hpp"
#include "a3dmm/trace.hpp"

namespace a3dmm {

enum class SafeguardRule {
  /// a_k = min(a, b / (k^{1+delta} |E|)): bounds the applied perturbation.
  Increment,
  /// a_k = min(a, b / (k^{1+delta} |z_k - z_{k-1}|)).
  Literal,
};

struct Safeguard {
  bool enabled = false;
  double a = 1.0;
  /// Defaults to 1e6 * |v_1| when unset.
  std::optional<double> b;
  double delta = 3.0;
  SafeguardRule rule = SafeguardRule::Increment;
};

/// Which differences feed the window after an extrapolated step.
enum class DifferenceBase {
  Raw,           ///< z_k - z_{k-1}
  Extrapolated,  ///< z_k - zbar_{k-1}
};

struct ExtrapConfig {
  bool enabled = true;
  int q = 6;
  /// Extrapolation depth; unset means s = infinity.
  std::optional<int> s;
  /// Extrapolate every q + cadence_offset iterations.
  int cadence_offset = 1;
  /// Use reduced rank extrapolation for the s = infinity point.
  bool rre = false;
  Safeguard safeguard;
  DifferenceBase base = DifferenceBase::Raw;

  int cadence() const { return q + cadence_offset; }
  void validate() const;
  static ExtrapConfig disabled();
};

std::string describe(const ExtrapConfig& extrap);

/// 0 <= a_k <= a with |a_k E| <= b k^{-(1+delta)} under the increment rule.
double safeguard_coefficient(int k, double a, double b, double delta,
                             double norm_e);

struct InertialConfig {
  double a = 0.3;
  double b = 0.0;
};

enum class WarmStart { Previous, Zero };

struct InnerSolver {
  int max_inner_steps = 10;
  /// Early exit when successive inner iterates move less than this; 0 runs
  /// exactly max_inner_steps.
  double tolerance = 0.0;
  WarmStart warm = WarmStart::Previous;

  void validate() const;
};

/// Solution used for the distance columns of the trace.
struct Reference {
  VectorXd z;
  VectorXd x;
};

using TraceSink = std::function<void(const TraceRecord&, const IterateState&)>;

struct RunOptions {
  std::optional<VectorXd> z0;
  const Reference* reference = nullptr;
  TraceSink sink;
  /// Keep the per-iteration records in the returned trace.
  bool keep_trace = true;
};

struct RunResult {
  IterateState state;
  Trace trace;
  bool converged = false;
  int iterations = 0;
  /// Sum of |zbar_k - z_k| over all extrapolated steps.
  double perturbation_sum = 0.0;
  int extrapolations = 0;
};

/// Standard ADMM with trajectory-following extrapolation.
RunResult run_a3dmm(const SplitProblem& problem, const SolverConfig& config,
                    const ExtrapConfig& extrap, const RunOptions& options = {});

/// Same loop for any variant; `config.variant == Standard` is run_a3dmm.
RunResult run_variant(const SplitProblem& problem, const SolverConfig& config,
                      const ExtrapConfig& extrap,
                      const RunOptions& options = {});

/// Inertial ADMM: zbar_k = z_k + a (z_k - z_{k-1}) + b (z_{k-1} - z_{k-2}).
RunResult run_inertial(const SplitProblem& problem, const SolverConfig& config,
                       const InertialConfig& inertial,
                       const RunOptions& options = {});

/// Replaces the x-subproblem by a fixed number of accelerated gradient steps
/// warm-started from the previous x. Requires `problem.iterative_r`.
RunResult run_inexact(const SplitProblem& problem, const InnerSolver& inner,
                      const SolverConfig& config, const ExtrapConfig& extrap,
                      const RunOptions& options = {});

/// Copy of `problem` whose x-subproblem is the inexact inner solver. The copy
/// carries its own warm-start state; build one per run.
SplitProblem with_inexact_subproblem(const SplitProblem& problem,
                                     const InnerSolver& inner);

}  // namespace a3dmm
