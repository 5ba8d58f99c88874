#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "a3dmm/accel.hpp"
#include "a3dmm/error.hpp"
#include "a3dmm/problems.hpp"
#include "support.hpp"

using namespace a3dmm;
using a3dmm::testing::random_matrix;
using a3dmm::testing::random_vector;

namespace {

SolverConfig config_for(const ProblemInstance& inst, int max_iter = 3000,
                        double tol = 1e-10) {
  SolverConfig c;
  c.gamma = inst.default_gamma;
  c.max_iter = max_iter;
  c.tol = tol;
  return c;
}

ExtrapConfig a3dmm_config(int q, std::optional<int> s) {
  ExtrapConfig e;
  e.q = q;
  e.s = s;
  return e;
}

/// Two parallel lines x_2 = 0 and x_2 = 1: ADMM differences settle on the
/// constant gap vector, so every fit has c = 1 and rho(C) = 1.
SplitProblem parallel_lines() {
  const double inf = std::numeric_limits<double>::infinity();
  return SplitProblem{
      oracles::box(VectorXd{{-inf, 0.0}}, VectorXd{{inf, 0.0}}),
      oracles::negated(oracles::box(VectorXd{{-inf, 1.0}}, VectorXd{{inf, 1.0}})),
      VectorXd::Zero(2), std::nullopt};
}

/// min mu |x|_1 + 1/2 |y - f|^2 s.t. K x - y = 0 with tall K, so the
/// x-subproblem needs an inner solver.
SplitProblem analysis_lasso(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MatrixXd k = random_matrix(rng, 40, 15) / std::sqrt(40.0);
  VectorXd f = random_vector(rng, 40);
  LinearMap map = LinearMap::dense(k);
  ProxOracle r = oracles::l1(15, 0.05);
  IterativeProx inner{r, map, operator_norm_squared(map, 1e-12)};
  ProxOracle exact = r;
  exact.map = map;
  exact.evaluate_fn = [inner](const VectorXd& w, double gamma) {
    return inner.solve(w, gamma, VectorXd::Zero(15), 200000, 1e-15).x;
  };
  ProxOracle j = oracles::negated(
      oracles::quadratic(RegularizedQuadratic(MatrixXd::Identity(40, 40)), -f));
  return SplitProblem{exact, j, VectorXd::Zero(40), inner};
}

}  // namespace

TEST(ExtrapConfig, Validation) {
  ExtrapConfig e;
  EXPECT_EQ(e.cadence(), 7);
  EXPECT_EQ(describe(e), "q=6,s=inf");
  e.s = 100;
  EXPECT_EQ(describe(e), "q=6,s=100");
  EXPECT_EQ(describe(ExtrapConfig::disabled()), "none");
  e.q = 0;
  EXPECT_ERRC(e.validate(), Errc::ConfigError);
  e.q = 3;
  e.cadence_offset = 0;
  EXPECT_ERRC(e.validate(), Errc::ConfigError);
  e.cadence_offset = 1;
  e.safeguard.enabled = true;
  e.safeguard.a = 1.5;
  EXPECT_ERRC(e.validate(), Errc::ConfigError);
  InnerSolver in;
  in.max_inner_steps = 0;
  EXPECT_ERRC(in.validate(), Errc::ConfigError);
}

TEST(Safeguard, Examples) {
  EXPECT_DOUBLE_EQ(safeguard_coefficient(1, 1.0, 1.0, 1.0, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(safeguard_coefficient(10, 1.0, 1.0, 1.0, 1.0), 0.01);
  EXPECT_DOUBLE_EQ(safeguard_coefficient(50, 0.7, 1e-3, 2.0, 0.0), 0.7);
}

TEST(Safeguard, BoundsAppliedIncrement) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + trial;
    const double a = u(rng), b = 1e-3 + u(rng), delta = 0.1 + 3 * u(rng);
    const double ne = std::exp(10 * u(rng) - 5);
    const double ak = safeguard_coefficient(k, a, b, delta, ne);
    EXPECT_GE(ak, 0.0);
    EXPECT_LE(ak, a);
    EXPECT_LE(ak * ne, b * std::pow(k, -(1 + delta)) * (1 + 1e-12));
  }
}

TEST(RunA3dmm, DisabledIsBitIdenticalToAdmm) {
  ProblemInstance inst = make_lasso();
  SolverConfig c = config_for(inst, 300);
  RunResult r = run_a3dmm(inst.problem, c, ExtrapConfig::disabled());
  IterateState s = IterateState::initial(inst.problem);
  ASSERT_EQ(r.trace.records.size(), 300u);
  for (const TraceRecord& rec : r.trace.records) {
    s = admm_step(inst.problem, s, c.gamma);
    ASSERT_EQ(rec.norm_v, s.v.norm()) << "k=" << rec.k;
    ASSERT_FALSE(rec.extrapolated);
  }
  EXPECT_EQ(r.state.z, s.z);
  EXPECT_EQ(r.extrapolations, 0);
}

TEST(RunA3dmm, ExtrapolatesOnlyOnCadence) {
  ProblemInstance inst = make_lasso();
  for (int q : {3, 6}) {
    ExtrapConfig e = a3dmm_config(q, 100);
    RunResult r = run_a3dmm(inst.problem, config_for(inst, 500), e);
    EXPECT_GT(r.extrapolations, 0);
    for (const TraceRecord& rec : r.trace.records)
      if (rec.extrapolated) EXPECT_EQ(rec.k % e.cadence(), 0) << rec.k;
  }
}

TEST(RunA3dmm, GuardMatchesIndependentFit) {
  // Mirror the window through the sink and recompute every fit.
  for (ProblemInstance inst :
       {make_lasso(), make_affine_constrained(Regularizer::L1,
                                              AffineShape::desk(Regularizer::L1))}) {
    for (std::optional<int> s : {std::optional<int>(100), std::optional<int>()}) {
      ExtrapConfig e = a3dmm_config(6, s);
      DiffWindow mirror(inst.problem.p(), e.q + 1);
      VectorXd z_prev = VectorXd::Zero(inst.problem.p());
      int checked = 0;
      RunOptions opt;
      opt.sink = [&](const TraceRecord& rec, const IterateState& st) {
        mirror.push(st.z - z_prev);
        z_prev = st.z;
        bool expect = false;
        if (rec.k % e.cadence() == 0 && mirror.full() && rec.norm_v > 1e-10) {
          CompanionFit fit = fit_coefficients(mirror, e.q);
          expect = fit.rho < 1.0 &&
                   (s || std::abs(1 - fit.coeff_sum) > kNearSingular);
          ++checked;
        }
        EXPECT_EQ(rec.extrapolated, expect) << "k=" << rec.k;
      };
      run_a3dmm(inst.problem, config_for(inst, 600), e, opt);
      EXPECT_GT(checked, 10);
    }
  }
}

TEST(RunA3dmm, UnitSpectralRadiusFallsBackToPlainStep) {
  SplitProblem p = parallel_lines();
  SolverConfig c;
  c.max_iter = 60;
  c.tol = 0.0;
  RunOptions opt;
  opt.z0 = VectorXd{{0.4, -0.3}};
  RunResult plain = run_a3dmm(p, c, ExtrapConfig::disabled(), opt);
  RunResult guarded = run_a3dmm(p, c, a3dmm_config(2, std::nullopt), opt);
  EXPECT_EQ(guarded.extrapolations, 0);
  EXPECT_TRUE(plain.trace.same_values(guarded.trace));
  EXPECT_NEAR(plain.state.v.norm(), 1.0, 1e-12);
}

TEST(RunA3dmm, StagnationIsHarmless) {
  DiffWindow w(3, 4);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 3; ++i) w.push(random_vector(rng, 3));
  w.push(VectorXd::Zero(3));
  CompanionFit fit = fit_coefficients(w, 3);
  VectorXd zk = random_vector(rng, 3);
  EXPECT_TRUE(fit.c.isZero(1e-15));
  EXPECT_TRUE(extrapolate_finite(zk, w, fit, 100).isApprox(zk, 1e-15));
  EXPECT_TRUE(extrapolate_infinite(zk, w, fit).isApprox(zk, 1e-15));
}

TEST(RunVariant, StandardAndUnitRelaxationMatchRunA3dmm) {
  ProblemInstance inst = make_lasso();
  ExtrapConfig e = a3dmm_config(6, std::nullopt);
  SolverConfig c = config_for(inst, 400);
  RunResult base = run_a3dmm(inst.problem, c, e);
  RunResult std_variant = run_variant(inst.problem, c, e);
  c.variant = Variant::Relaxed;
  c.phi = 1.0;
  RunResult relaxed = run_variant(inst.problem, c, e);
  EXPECT_TRUE(base.trace.same_values(std_variant.trace));
  EXPECT_TRUE(base.trace.same_values(relaxed.trace));
  EXPECT_EQ(base.state.z, relaxed.state.z);
}

TEST(RunVariant, SymmetricBeatsStandardOnQp) {
  ProblemInstance inst = make_qp_box(20, 1);
  SolverConfig c = config_for(inst, 5000, 1e-9);
  RunResult standard = run_variant(inst.problem, c, ExtrapConfig::disabled());
  c.variant = Variant::Symmetric;
  RunResult symmetric = run_variant(inst.problem, c, ExtrapConfig::disabled());
  ASSERT_TRUE(standard.converged);
  ASSERT_TRUE(symmetric.converged);
  EXPECT_LT(symmetric.iterations, standard.iterations);
}

TEST(RunA3dmm, DeterministicTraces) {
  ProblemInstance a = make_lasso(64, 256, 13, kDeskLassoMu, 9);
  ProblemInstance b = make_lasso(64, 256, 13, kDeskLassoMu, 9);
  ExtrapConfig e = a3dmm_config(6, 100);
  RunResult ra = run_a3dmm(a.problem, config_for(a, 500), e);
  RunResult rb = run_a3dmm(b.problem, config_for(b, 500), e);
  EXPECT_TRUE(ra.trace.same_values(rb.trace));
  EXPECT_EQ(ra.state.z, rb.state.z);
}

TEST(RunA3dmm, SinkSeesEveryRecord) {
  ProblemInstance inst = make_feasibility(std::numbers::pi / 5, 2);
  std::vector<int> ks;
  RunOptions opt;
  opt.z0 = inst.z0;
  opt.sink = [&](const TraceRecord& rec, const IterateState& st) {
    EXPECT_EQ(rec.k, st.k);
    ks.push_back(rec.k);
  };
  opt.keep_trace = false;
  RunResult r = run_a3dmm(inst.problem, config_for(inst, 50), a3dmm_config(2, 5), opt);
  EXPECT_TRUE(r.trace.records.empty());
  ASSERT_EQ(static_cast<int>(ks.size()), r.iterations);
  for (std::size_t i = 0; i < ks.size(); ++i) EXPECT_EQ(ks[i], int(i) + 1);
}

TEST(Safeguard, PerturbationsSummable) {
  for (ProblemInstance inst :
       {make_lasso(), make_affine_constrained(Regularizer::L1,
                                              AffineShape::desk(Regularizer::L1)),
        make_feasibility(std::numbers::pi / 4, 1)}) {
    for (SafeguardRule rule : {SafeguardRule::Increment, SafeguardRule::Literal}) {
      ExtrapConfig e = a3dmm_config(6, std::nullopt);
      e.safeguard.enabled = true;
      e.safeguard.b = 0.5;
      e.safeguard.delta = 1.0;
      e.safeguard.rule = rule;
      RunOptions opt;
      opt.z0 = inst.z0;
      RunResult r = run_a3dmm(inst.problem, config_for(inst, 3000), e, opt);
      double sum = 0;
      for (const TraceRecord& rec : r.trace.records) {
        if (!rec.extrapolated) continue;
        sum += rec.perturbation;
        if (rule == SafeguardRule::Increment)
          EXPECT_LE(rec.perturbation, 0.5 / (double(rec.k) * rec.k) * (1 + 1e-12));
      }
      EXPECT_NEAR(sum, r.perturbation_sum, 1e-12 * (1 + sum));
      if (rule == SafeguardRule::Increment)
        EXPECT_LE(sum, 0.5 * std::numbers::pi * std::numbers::pi / 6 + 1e-12);
      EXPECT_TRUE(r.converged) << inst.descriptor;
    }
  }
}

TEST(Safeguard, DefaultConstantScalesWithFirstStep) {
  ProblemInstance inst = make_lasso();
  ExtrapConfig off = a3dmm_config(6, std::nullopt);
  ExtrapConfig on = off;
  on.safeguard.enabled = true;
  RunResult a = run_a3dmm(inst.problem, config_for(inst, 30), off);
  RunResult b = run_a3dmm(inst.problem, config_for(inst, 30), on);
  // With b = 1e6 |v_1| the guard is inactive this early.
  EXPECT_TRUE(a.trace.same_values(b.trace));
}

TEST(Inexact, ManyInnerStepsMatchExactSubproblem) {
  SplitProblem p = analysis_lasso(5);
  SolverConfig c;
  c.gamma = 1.0;
  c.max_iter = 50;
  c.tol = 0.0;
  RunResult exact = run_a3dmm(p, c, ExtrapConfig::disabled());
  InnerSolver in;
  in.max_inner_steps = 500;
  RunResult inexact = run_inexact(p, in, c, ExtrapConfig::disabled());
  EXPECT_LE((exact.state.z - inexact.state.z).norm(), 1e-6);
  EXPECT_EQ(inexact.trace.meta("inner_steps"), "500");
}

TEST(Inexact, SingleInnerStepStaysBounded) {
  SplitProblem p = analysis_lasso(6);
  SolverConfig c;
  c.gamma = 1.0;
  c.max_iter = 4000;
  c.tol = 1e-12;
  RunResult ref = run_a3dmm(p, c, ExtrapConfig::disabled());
  ASSERT_TRUE(ref.converged);
  InnerSolver in;
  in.max_inner_steps = 1;
  Reference r{ref.state.z, ref.state.x};
  RunOptions opt;
  opt.reference = &r;
  c.max_iter = 1000;
  RunResult run = run_inexact(p, in, c, ExtrapConfig::disabled(), opt);
  const double d0 = r.z.norm();
  for (const TraceRecord& rec : run.trace.records)
    EXPECT_LE(*rec.dist_z, 2 * d0 + 1.0) << rec.k;
}

TEST(Inexact, RequiresIterativeSubproblem) {
  ProblemInstance inst = make_lasso();
  EXPECT_ERRC(with_inexact_subproblem(inst.problem, InnerSolver{}),
              Errc::InvalidArgument);
}

TEST(Inexact, RisingInnerObjectiveIsReported) {
  // A step size far below the true Lipschitz constant makes the inner
  // gradient iteration blow up.
  SplitProblem p = analysis_lasso(7);
  p.iterative_r->map_norm_sq = 1e-6;
  InnerSolver in;
  in.max_inner_steps = 50;
  SolverConfig c;
  c.max_iter = 5;
  EXPECT_ERRC(run_inexact(p, in, c, ExtrapConfig::disabled()),
              Errc::SubproblemFailure);
}

TEST(Inexact, TvInpaintingImprovesOnObservation) {
  MatrixXd img = piecewise_constant_image(32, 32, 3);
  ProblemInstance inst = make_tv_inpainting(img, 0.5, 3);
  InnerSolver in;
  SolverConfig c;
  c.gamma = inst.default_gamma;
  c.max_iter = 400;
  c.tol = 1e-9;
  std::vector<double> psnrs;
  RunOptions opt;
  opt.sink = [&](const TraceRecord&, const IterateState& st) {
    psnrs.push_back(psnr(unvec_image(st.x, 32, 32), img));
  };
  RunResult r = run_inexact(inst.problem, in, c, ExtrapConfig::disabled(), opt);
  EXPECT_TRUE(r.converged);
  const VectorXd observed = inst.mask->cwiseProduct(img.reshaped());
  const double start = psnr(unvec_image(observed, 32, 32), img);
  EXPECT_GT(psnrs.back(), start + 4.0);
  // After burn-in the reconstruction never falls more than 0.1 dB below its
  // best value so far; it is not strictly monotone.
  double best = psnrs[40];
  for (std::size_t k = 41; k < psnrs.size(); ++k) {
    EXPECT_GE(psnrs[k], best - 0.1) << k;
    best = std::max(best, psnrs[k]);
  }
}
