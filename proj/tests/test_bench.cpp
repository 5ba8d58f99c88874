#include <gtest/gtest.h>

#include <complex>
#include <filesystem>
#include <map>

#include "a3dmm/bench.hpp"
#include "a3dmm/error.hpp"
#include "support.hpp"

using namespace a3dmm;

namespace {

std::map<std::string, Trace> by_solver(const ExperimentResult& r) {
  std::map<std::string, Trace> out;
  for (const auto& t : r.traces) out[*t.meta("solver")] = t;
  return out;
}

int iterations_to(const Trace& t, double tol, bool use_z) {
  auto k = t.first_below(tol, use_z);
  return k ? *k : std::numeric_limits<int>::max();
}

}  // namespace

TEST(SolverSpec, ParseAndId) {
  EXPECT_EQ(SolverSpec::parse("admm").kind, SolverSpec::Kind::Admm);
  SolverSpec i = SolverSpec::parse("iadmm:0.3");
  EXPECT_EQ(i.kind, SolverSpec::Kind::Inertial);
  EXPECT_EQ(i.inertial.a, 0.3);
  EXPECT_EQ(i.inertial.b, 0.0);
  SolverSpec three = SolverSpec::parse("iadmm3:0.4:-0.2");
  EXPECT_EQ(three.inertial.b, -0.2);
  SolverSpec a = SolverSpec::parse("a3dmm:6:inf");
  EXPECT_EQ(a.extrap.q, 6);
  EXPECT_FALSE(a.extrap.s.has_value());
  EXPECT_EQ(SolverSpec::parse("a3dmm:6:100").extrap.s, 100);
  EXPECT_TRUE(SolverSpec::parse("rre:4").extrap.rre);
  for (const char* text : {"admm", "iadmm:0.3", "a3dmm:6:inf", "a3dmm:6:100"})
    EXPECT_EQ(SolverSpec::parse(SolverSpec::parse(text).id()).id(),
              SolverSpec::parse(text).id());
  for (const char* bad : {"", "foo", "admm:1", "iadmm", "a3dmm:6", "a3dmm:0:5",
                          "a3dmm:6:-1", "iadmm:-0.1", "iadmm:x"})
    EXPECT_ERRC(SolverSpec::parse(bad), Errc::ConfigError);
}

TEST(GammaRule, ParseAndResolve) {
  EXPECT_EQ(GammaRule::parse("1.5").resolve(4.0), 1.5);
  EXPECT_EQ(GammaRule::parse("knorm+0.1").resolve(4.0), 4.1);
  EXPECT_EQ(GammaRule::parse("knorm/10").resolve(4.0), 0.4);
  EXPECT_EQ(GammaRule::parse("knorm/10").text(), "knorm/10");
  for (const char* bad : {"", "-1", "knorm*2", "knorm/0", "abc"})
    EXPECT_ERRC(GammaRule::parse(bad), Errc::ConfigError);
}

TEST(Depth, IntegerOrInfinity) {
  EXPECT_FALSE(parse_depth("inf").has_value());
  EXPECT_EQ(parse_depth("25"), 25);
  EXPECT_ERRC(parse_depth("-3"), Errc::ConfigError);
  EXPECT_ERRC(parse_depth("1.5"), Errc::ConfigError);
}

TEST(RunConfig, LoadAndValidate) {
  RunConfig c;
  c.load_text(
      "# comment\nproblem = feasibility\nalpha = 0.5\nseed=3\n"
      "solvers = admm, a3dmm:2:inf\ngamma = knorm+0.1\ns = inf\n");
  EXPECT_EQ(c.problem, "feasibility");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.param("alpha", 0.0), 0.5);
  EXPECT_EQ(c.solvers.size(), 2u);
  EXPECT_FALSE(c.s.has_value());
  EXPECT_NO_THROW(c.validate(true));

  RunConfig empty;
  EXPECT_ERRC(empty.validate(true), Errc::ConfigError);
  EXPECT_NO_THROW(empty.validate(false));

  RunConfig bad;
  EXPECT_ERRC(bad.set("max_iter", "zero"), Errc::ConfigError);
  EXPECT_ERRC(bad.load_text("no equals sign\n"), Errc::ConfigError);
  bad.problem = "nope";
  EXPECT_ERRC(bad.validate(false), Errc::ConfigError);
  EXPECT_ERRC(RunConfig{}.load("/nonexistent/config.txt"), Errc::IoError);
}

TEST(Experiment, EmptyComparisonSetRejected) {
  RunConfig c;
  EXPECT_ERRC(run_experiment(c), Errc::ConfigError);
}

TEST(Experiment, LassoDeskOrdering) {
  RunConfig c;
  c.problem = "lasso";
  c.gamma = GammaRule::parse("knorm+0.1");
  c.solvers = {"admm", "iadmm:0.3", "a3dmm:6:100", "a3dmm:6:inf"};
  ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.traces.size(), 4u);
  auto t = by_solver(r);
  const int best = iterations_to(t["a3dmm:6:inf"], 1e-6, false);
  for (const auto& [id, trace] : t)
    if (id != "a3dmm:6:inf") EXPECT_LT(best, iterations_to(trace, 1e-6, false)) << id;
}

TEST(Experiment, FeasibilityInertialOrdering) {
  RunConfig c;
  c.load_text(
      "problem = feasibility\nalpha = 0.7853981633974483\n"
      "solvers = admm, iadmm:0.1, iadmm:0.3\n");
  auto t = by_solver(run_experiment(c));
  const int admm = iterations_to(t["admm"], 1e-8, true);
  EXPECT_LT(admm, iterations_to(t["iadmm:0.1"], 1e-8, true));
  EXPECT_LT(admm, iterations_to(t["iadmm:0.3"], 1e-8, true));
}

// Linear model: zbar = z + a dz_k + b dz_{k-1}, z_next = M zbar with M
// acting as eta = cos(alpha) e^{i alpha}. The 3-point scheme is faster than
// ADMM exactly when the largest root of
// r^3 - (1+a) eta r^2 - (b-a) eta r + b eta has modulus below cos(alpha).
TEST(Experiment, ThreePointOrderingFollowsRootModulus) {
  for (double alpha : {0.3, 0.5, 0.7853981633974483, 1.0}) {
    const std::complex<double> eta = std::polar(std::cos(alpha), alpha);
    const double a = 0.4, b = -0.2;
    Eigen::Matrix3cd companion;
    companion << (1 + a) * eta, (b - a) * eta, -b * eta, 1, 0, 0, 0, 1, 0;
    const double rho = companion.eigenvalues().cwiseAbs().maxCoeff();

    RunConfig c;
    c.problem = "feasibility";
    c.set("alpha", format_double(alpha));
    c.solvers = {"admm", "iadmm3:0.4:-0.2"};
    auto t = by_solver(run_experiment(c));
    const int admm = iterations_to(t["admm"], 1e-8, true);
    const int three = iterations_to(t["iadmm3:0.4:-0.2"], 1e-8, true);
    EXPECT_EQ(three < admm, rho < std::cos(alpha)) << alpha;
  }
}

TEST(Experiment, RunOrderDoesNotMatter) {
  RunConfig c;
  c.problem = "affine-l1";
  c.max_iter = 300;
  c.solvers = {"admm", "a3dmm:6:inf", "iadmm:0.3", "rre:5"};
  auto forward = by_solver(run_experiment(c));
  std::reverse(c.solvers.begin(), c.solvers.end());
  auto backward = by_solver(run_experiment(c));
  c.parallel = true;
  auto parallel = by_solver(run_experiment(c));
  for (const auto& [id, trace] : forward) {
    EXPECT_TRUE(trace.same_values(backward[id])) << id;
    EXPECT_TRUE(trace.same_values(parallel[id])) << id;
  }
}

TEST(Experiment, TvRunsAreIndependent) {
  RunConfig c;
  c.problem = "tv";
  c.set("size", "16");
  c.max_iter = 20;
  c.solvers = {"admm", "a3dmm:6:100"};
  auto forward = by_solver(run_experiment(c));
  std::reverse(c.solvers.begin(), c.solvers.end());
  auto backward = by_solver(run_experiment(c));
  for (const auto& [id, trace] : forward)
    EXPECT_TRUE(trace.same_values(backward[id])) << id;
}

TEST(Experiment, MetadataRecorded) {
  RunConfig c;
  c.problem = "qp";
  c.solvers = {"a3dmm:6:inf"};
  c.max_iter = 50;
  ExperimentResult r = run_experiment(c);
  const Trace& t = r.traces.front();
  EXPECT_EQ(t.meta("solver"), "a3dmm:6:inf");
  EXPECT_EQ(t.meta("s"), "inf");
  EXPECT_EQ(t.meta("q"), "6");
  EXPECT_TRUE(t.meta("gamma").has_value());
  EXPECT_TRUE(t.meta("version").has_value());
  EXPECT_EQ(t.meta("seed"), "1");
}

TEST(Plot, DeterministicSvg) {
  RunConfig c;
  c.problem = "feasibility";
  c.solvers = {"admm", "iadmm:0.3"};
  ExperimentResult r = run_experiment(c);
  const std::string a = render_plot_svg(r.traces, PlotQuantity::DistZ);
  const std::string b = render_plot_svg(r.traces, PlotQuantity::DistZ);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("admm"), std::string::npos);
  EXPECT_NE(a.find("iadmm:0.3"), std::string::npos);

  std::vector<Trace> one{r.traces.front()};
  const std::string single = render_plot_svg(one, PlotQuantity::DistZ);
  std::size_t count = 0;
  for (auto p = single.find("<polyline"); p != std::string::npos;
       p = single.find("<polyline", p + 1))
    ++count;
  EXPECT_EQ(count, 1u);
}

TEST(Plot, MissingQuantity) {
  Trace t;
  t.set_meta("solver", "admm");
  t.records.push_back({1, 1.0, std::nullopt, std::nullopt, std::nullopt,
                       std::nullopt, false, 0});
  EXPECT_ERRC(render_plot_svg({t}, PlotQuantity::DistX), Errc::EmptySelection);
  EXPECT_ERRC(render_plot_svg({}, PlotQuantity::NormV), Errc::EmptySelection);
  EXPECT_NO_THROW(render_plot_svg({t}, PlotQuantity::NormV));
  EXPECT_EQ(parse_quantity("one_minus_cos"), PlotQuantity::OneMinusCos);
  EXPECT_ERRC(parse_quantity("psnr"), Errc::ConfigError);
}

TEST(Plot, WritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "a3dmm_bench_test";
  std::filesystem::remove_all(dir);
  RunConfig c;
  c.problem = "feasibility";
  c.solvers = {"admm", "a3dmm:2:inf"};
  c.plots = {"dist_z", "cos_theta"};
  c.out = dir;
  ExperimentResult r = run_experiment(c);
  write_experiment(r, c);
  EXPECT_TRUE(std::filesystem::exists(dir / "admm.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "dist_z.svg"));
  EXPECT_TRUE(std::filesystem::exists(dir / "cos_theta.svg"));
  std::filesystem::remove_all(dir);
}
