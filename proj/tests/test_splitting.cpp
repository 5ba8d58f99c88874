#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "a3dmm/error.hpp"
#include "a3dmm/problems.hpp"
#include "a3dmm/splitting.hpp"
#include "support.hpp"

using namespace a3dmm;
using a3dmm::testing::random_vector;

namespace {

/// R = 0 and J = 0 on R^2 with x - y = 0: every point is feasible.
SplitProblem whole_plane() {
  return SplitProblem{oracles::zero(2), oracles::negated(oracles::zero(2)),
                      VectorXd::Zero(2), std::nullopt};
}

ProblemInstance small_lasso() { return make_lasso(12, 3 * 12, 3, 0.1, 4); }

std::vector<ProblemInstance> gallery() {
  std::vector<ProblemInstance> g;
  g.push_back(make_lasso());
  g.push_back(make_affine_constrained(Regularizer::L1,
                                      AffineShape::desk(Regularizer::L1)));
  g.push_back(make_qp_box(20, 2));
  g.push_back(make_feasibility(std::numbers::pi / 4, 3));
  return g;
}

}  // namespace

TEST(SplitProblem, ValidatesDimensions) {
  SplitProblem p{oracles::zero(2), oracles::negated(oracles::zero(3)),
                 VectorXd::Zero(2), std::nullopt};
  EXPECT_ERRC(p.validate(), Errc::DimensionMismatch);
  EXPECT_NO_THROW(whole_plane().validate());
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.gamma = 0;
  EXPECT_ERRC(c.validate(), Errc::InvalidArgument);
  c.gamma = 1;
  c.variant = Variant::Relaxed;
  c.phi = 2.0;
  EXPECT_ERRC(c.validate(), Errc::BadRelaxation);
  c.phi = 1.7;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(parse_variant("symmetric"), Variant::Symmetric);
  EXPECT_EQ(to_string(Variant::Relaxed), "relaxed");
  EXPECT_ERRC(parse_variant("spiral"), Errc::InvalidArgument);
}

TEST(AdmmStep, FeasiblePlaneReachesFixedPointInOneStep) {
  SplitProblem p = whole_plane();
  IterateState s = IterateState::initial(p, VectorXd{{0.3, -2.0}});
  s = admm_step(p, s, 1.0);
  for (int k = 0; k < 3; ++k) {
    s = admm_step(p, s, 1.0);
    EXPECT_TRUE(s.v.isZero(0.0));
  }
}

TEST(AdmmStep, StateIdentitiesHoldAfterEveryStep) {
  ProblemInstance inst = small_lasso();
  const SplitProblem& p = inst.problem;
  const double gamma = 0.7;
  IterateState s = IterateState::initial(p);
  for (int k = 0; k < 60; ++k) {
    const VectorXd zbar = s.z;
    IterateState next = admm_step(p, s, gamma);
    VectorXd psi = zbar + gamma * (p.b_map().apply(next.y) - p.b);
    VectorXd z = next.psi + gamma * p.a().apply(next.x);
    EXPECT_LE((next.psi - psi).norm(), 1e-10 * (1 + psi.norm()));
    EXPECT_LE((next.z - z).norm(), 1e-10 * (1 + z.norm()));
    EXPECT_EQ(next.v, next.z - s.z);
    EXPECT_EQ(next.k, k + 1);
    s = std::move(next);
  }
}

TEST(AdmmStep, FeasibilityRatioTendsToCosAlpha) {
  ProblemInstance inst = make_feasibility(std::numbers::pi / 4, 1);
  IterateState s = IterateState::initial(inst.problem, inst.z0);
  double prev = 0;
  double ratio = 0;
  for (int k = 0; k < 40; ++k) {
    s = admm_step(inst.problem, s, 1.0);
    if (prev > 0) ratio = s.v.norm() / prev;
    prev = s.v.norm();
  }
  EXPECT_NEAR(ratio, std::cos(std::numbers::pi / 4), 1e-10);
}

TEST(RelaxedStep, PhiOneIsBitIdenticalToAdmm) {
  ProblemInstance inst = small_lasso();
  IterateState a = IterateState::initial(inst.problem);
  IterateState r = a;
  for (int k = 0; k < 100; ++k) {
    a = admm_step(inst.problem, a, 0.9);
    r = relaxed_step(inst.problem, r, 0.9, 1.0);
    ASSERT_EQ(a.z, r.z);
    ASSERT_EQ(a.x, r.x);
    ASSERT_EQ(a.psi, r.psi);
  }
}

TEST(RelaxedStep, RejectsPhiOutsideInterval) {
  SplitProblem p = whole_plane();
  IterateState s = IterateState::initial(p);
  EXPECT_ERRC(relaxed_step(p, s, 1.0, 0.0), Errc::BadRelaxation);
  EXPECT_ERRC(relaxed_step(p, s, 1.0, 2.0), Errc::BadRelaxation);
}

TEST(RelaxedStep, OverRelaxedLassoConverges) {
  ProblemInstance inst = small_lasso();
  IterateState s = IterateState::initial(inst.problem);
  double prev = INFINITY;
  for (int k = 0; k < 5000 && (k < 2 || s.v.norm() > 1e-10); ++k) {
    s = relaxed_step(inst.problem, s, inst.default_gamma, 1.5);
    if (k > 0) {
      EXPECT_LE(s.v.norm(), prev + 1e-12);
    }
    prev = s.v.norm();
  }
  EXPECT_LE(s.v.norm(), 1e-10);
}

TEST(RelaxedStep, FeasibilitySpiralPrefersPhiOne) {
  ProblemInstance inst = make_feasibility(std::numbers::pi / 6, 2);
  auto iterations = [&](double phi) {
    IterateState s = IterateState::initial(inst.problem, inst.z0);
    int k = 0;
    do {
      s = relaxed_step(inst.problem, s, 1.0, phi);
      ++k;
    } while (s.z.norm() > 1e-10 && k < 10000);
    return k;
  };
  const int best = iterations(1.0);
  for (double phi : {0.5, 0.8, 1.2, 1.5, 1.8}) EXPECT_LT(best, iterations(phi));
}

TEST(AdmmStep, OrthogonalLinesConvergeWithinTwoSteps) {
  ProblemInstance inst = make_feasibility(std::numbers::pi / 2, 5);
  IterateState s = IterateState::initial(inst.problem, inst.z0);
  s = admm_step(inst.problem, s, 1.0);
  EXPECT_LE(s.z.norm(), 1e-15);
  s = admm_step(inst.problem, s, 1.0);
  EXPECT_LE(s.z.norm(), 1e-15);
  EXPECT_LE(s.x.norm(), 1e-15);
}

// Reflections through two orthogonal lines compose to -I, so the symmetric
// iteration flips sign forever instead of converging.
TEST(SymmetricStep, OrthogonalLinesReflectToMinusIdentity) {
  ProblemInstance inst = make_feasibility(std::numbers::pi / 2, 5);
  IterateState s = IterateState::initial(inst.problem, inst.z0);
  for (int k = 0; k < 6; ++k) {
    VectorXd before = s.z;
    s = symmetric_step(inst.problem, s, 1.0);
    EXPECT_LE((s.z + before).norm(), 1e-14);
  }
  EXPECT_NEAR(s.z.norm(), inst.z0->norm(), 1e-14);
}

TEST(SymmetricStep, OriginBlockKeepsYZero) {
  std::mt19937_64 rng(3);
  SplitProblem p{oracles::l1(5, 0.5), oracles::negated(oracles::origin(5)),
                 VectorXd::Zero(5), std::nullopt};
  IterateState s = IterateState::initial(p, random_vector(rng, 5));
  for (int k = 0; k < 10; ++k) {
    s = symmetric_step(p, s, 1.0);
    EXPECT_TRUE(s.y.isZero(0.0));
  }
}

TEST(SymmetricStep, ExpansiveOracleTriggersDivergence) {
  ProxOracle grow{"grow", LinearMap::identity(2),
                  [](const VectorXd& w, double) -> VectorXd { return -3.0 * w; },
                  [](const VectorXd&) { return 0.0; }};
  SplitProblem p{grow, oracles::negated(oracles::zero(2)), VectorXd::Zero(2),
                 std::nullopt};
  IterateState s = IterateState::initial(p, VectorXd{{1.0, 0.5}});
  EXPECT_ERRC(
      for (int k = 0; k < 200; ++k) s = symmetric_step(p, s, 1.0),
      Errc::Divergence);
  EXPECT_GT(s.k, 5);
}

TEST(SymmetricStep, QpNeedsFewerIterationsThanStandard) {
  ProblemInstance inst = make_qp_box(20, 1);
  auto count = [&](Variant v) {
    SolverConfig c;
    c.variant = v;
    c.gamma = inst.default_gamma;
    IterateState s = IterateState::initial(inst.problem);
    int k = 0;
    do {
      s = variant_step(inst.problem, s, s.z, c);
      ++k;
    } while (s.v.norm() > 1e-9 && k < 20000);
    return k;
  };
  EXPECT_LT(count(Variant::Symmetric), count(Variant::Standard));
}

TEST(InertialPredict, Examples) {
  VectorXd z{{2.0}}, zp{{1.0}}, zpp{{0.5}};
  EXPECT_EQ(inertial_predict(z, zp, std::nullopt, 0.0), z);
  EXPECT_DOUBLE_EQ(inertial_predict(z, zp, std::nullopt, 0.3)(0), 2.3);
  EXPECT_DOUBLE_EQ(inertial_predict(z, zp, zpp, 0.4, -0.2)(0), 2.4 - 0.1);
  EXPECT_ERRC(inertial_predict(z, zp, std::nullopt, -0.1), Errc::InvalidArgument);
}

TEST(DualDouglasRachford, MatchesAdmmOnLassoAndFeasibility) {
  for (ProblemInstance inst :
       {small_lasso(), make_feasibility(std::numbers::pi / 3, 2)}) {
    const double gamma = inst.default_gamma;
    IterateState s = IterateState::initial(inst.problem, inst.z0);
    VectorXd z = s.z;
    double worst = 0;
    for (int k = 0; k < 50; ++k) {
      s = admm_step(inst.problem, s, gamma);
      z = dr_dual_step(inst.problem, z, gamma).z_next;
      worst = std::max(worst, (s.z - z).norm());
    }
    EXPECT_LE(worst, 1e-10) << inst.descriptor;
  }
}

TEST(DualDouglasRachford, FixedPointIsStationary) {
  ProblemInstance inst = small_lasso();
  IterateState s = IterateState::initial(inst.problem);
  for (int k = 0; k < 20000 && (k < 2 || s.v.norm() > 1e-14); ++k)
    s = admm_step(inst.problem, s, inst.default_gamma);
  DualStep d = dr_dual_step(inst.problem, s.z, inst.default_gamma);
  EXPECT_LE((d.z_next - s.z).norm(), 1e-12 * (1 + s.z.norm()));
}

TEST(Gallery, MonotoneDifferencesAndFejer) {
  for (ProblemInstance inst : gallery()) {
    ReferenceOptions ro;
    ro.gamma = inst.default_gamma;
    const Reference& ref = compute_reference(inst, ro);
    IterateState s = IterateState::initial(inst.problem, inst.z0);
    double prev_v = INFINITY;
    double prev_d = (s.z - ref.z).norm();
    for (int k = 0; k < 400; ++k) {
      s = admm_step(inst.problem, s, inst.default_gamma);
      const double nv = s.v.norm();
      const double d = (s.z - ref.z).norm();
      if (k > 0) EXPECT_LE(nv, prev_v + 1e-12) << inst.descriptor << " k=" << k;
      EXPECT_LE(d, prev_d + 1e-10) << inst.descriptor << " k=" << k;
      prev_v = nv;
      prev_d = d;
    }
  }
}

TEST(Gallery, PrimalFeasibilityAtConvergence) {
  const double tol = 1e-10;
  for (ProblemInstance inst : gallery()) {
    const SplitProblem& p = inst.problem;
    IterateState s = IterateState::initial(p, inst.z0);
    for (int k = 0; k < 50000 && (k < 2 || s.v.norm() > tol); ++k)
      s = admm_step(p, s, inst.default_gamma);
    const VectorXd r = p.a().apply(s.x) + p.b_map().apply(s.y) - p.b;
    EXPECT_LE(r.norm(), 10 * tol) << inst.descriptor;
  }
}
