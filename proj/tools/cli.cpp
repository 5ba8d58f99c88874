#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "a3dmm/bench.hpp"
#include "a3dmm/error.hpp"
#include "a3dmm/spectra.hpp"

namespace a3dmm::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flags shared by every subcommand; empty strings mean "not given".
struct CommonFlags {
  std::string config, seed, gamma, variant, q, s, tol, max_iter, out;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key=value configuration file");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--gamma", gamma, "step size: number, knorm+c or knorm/c");
    app->add_option("--variant", variant, "standard | relaxed | symmetric");
    app->add_option("--q", q, "extrapolation window");
    app->add_option("--s", s, "extrapolation depth (integer or inf)");
    app->add_option("--tol", tol, "stop when |v_k| <= tol");
    app->add_option("--max-iter", max_iter, "iteration budget");
    app->add_option("--out", out, "output directory");
    app->add_option("--set", sets, "extra key=value override")
        ->type_name("KEY=VALUE");
  }

  /// File first, then flags.
  RunConfig resolve(RunConfig cfg) const {
    try {
      if (!config.empty()) cfg.load(config);
      auto apply = [&](const char* key, const std::string& v) {
        if (!v.empty()) cfg.set(key, v);
      };
      for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
          throw Error(Errc::ConfigError, "--set expects KEY=VALUE");
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      apply("seed", seed);
      apply("gamma", gamma);
      apply("variant", variant);
      apply("q", q);
      apply("s", s);
      apply("tol", tol);
      apply("max_iter", max_iter);
      apply("out", out);
    } catch (const Error& e) {
      if (e.code() == Errc::IoError) throw;
      throw UsageError(e.what());
    }
    return cfg;
  }
};

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(Errc::IoError,
                "cannot create " + dir.string() + ": " + ec.message());
  }
}

SolverConfig solver_config(const RunConfig& cfg, const ProblemInstance& inst) {
  SolverConfig s;
  s.gamma = resolve_gamma(cfg, inst);
  s.variant = cfg.variant;
  s.phi = cfg.phi;
  s.tol = cfg.tol;
  s.max_iter = cfg.max_iter;
  s.validate();
  return s;
}

void print_summary(std::ostream& out, const Trace& t) {
  const auto& last = t.records.back();
  out << std::left << std::setw(18) << t.meta("solver").value_or("?")
      << " iterations=" << last.k << " |v|=" << format_double(last.norm_v);
  if (last.dist_x) out << " |x-x*|=" << format_double(*last.dist_x);
  if (auto k = t.first_below(1e-6)) out << " k(|x-x*|<=1e-6)=" << *k;
  out << '\n';
}

int cmd_solve(const RunConfig& cfg, const std::string& solver_text,
              std::ostream& out) {
  cfg.validate(false);
  SolverSpec spec;
  if (!solver_text.empty()) {
    spec = SolverSpec::parse(solver_text);
  } else if (cfg.extrapolate) {
    spec.kind = SolverSpec::Kind::A3dmm;
    spec.extrap = ExtrapConfig{};
    spec.extrap.q = cfg.q;
    spec.extrap.s = cfg.s;
  }
  ProblemInstance inst = build_problem(cfg);
  const SolverConfig solver = solver_config(cfg, inst);
  RunResult r = run_solver(inst, spec, solver, cfg);
  ensure_dir(cfg.out);
  const auto path = cfg.out / "trace.csv";
  write_trace_csv(r.trace, path);
  out << inst.descriptor << " gamma=" << format_double(solver.gamma) << '\n';
  print_summary(out, r.trace);
  out << "converged=" << (r.converged ? "yes" : "no")
      << " trace=" << path.string() << '\n';
  return 0;
}

int cmd_bench(RunConfig cfg, std::ostream& out) {
  if (cfg.solvers.empty()) {
    cfg.solvers = {"admm", "iadmm:0.3", "a3dmm:6:100", "a3dmm:6:inf"};
  }
  if (cfg.plots.empty()) cfg.plots = {"dist_z", "norm_v"};
  ExperimentResult res = run_experiment(cfg);
  write_experiment(res, cfg);
  out << res.instance.descriptor << '\n';
  for (const auto& t : res.traces) print_summary(out, t);
  out << "output=" << cfg.out.string() << '\n';
  return 0;
}

int cmd_angles(const RunConfig& cfg, std::ostream& out) {
  cfg.validate(false);
  ProblemInstance inst = build_problem(cfg);
  const SolverConfig solver = solver_config(cfg, inst);
  RunResult r = run_solver(inst, SolverSpec{}, solver, cfg);
  AngleSeries series;
  std::vector<double> norms;
  for (const auto& rec : r.trace.records) {
    series.cos_theta.push_back(rec.cos_theta);
    norms.push_back(rec.norm_v);
  }
  if (!norms.empty()) series.truncate_at_noise(norms, 1e-9 * norms.front());
  ensure_dir(cfg.out);
  {
    std::ofstream csv(cfg.out / "angles.csv");
    if (!csv) throw Error(Errc::IoError, "cannot write angles.csv");
    csv << "k,norm_v,cos_theta\n";
    for (const auto& rec : r.trace.records) {
      csv << rec.k << ',' << format_double(rec.norm_v) << ',';
      if (rec.cos_theta) csv << format_double(*rec.cos_theta);
      csv << '\n';
    }
  }
  out << inst.descriptor << " gamma=" << format_double(solver.gamma) << '\n';
  try {
    classify_trajectory(series);
    out << "trajectory=" << to_string(series.kind)
        << " cos_theta_limit=" << format_double(series.limit)
        << " spread=" << format_double(series.spread) << '\n';
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientData) throw;
    out << "trajectory=undetermined (" << e.what() << ")\n";
  }
  if (inst.t_ar && inst.t_bj) {
    const double f = friedrichs_angle(*inst.t_ar, *inst.t_bj);
    out << "friedrichs_angle=" << format_double(f)
        << " predicted_cos_theta=" << format_double(std::cos(f)) << '\n';
  }
  return 0;
}

int cmd_spectra(const RunConfig& cfg, int steps, std::ostream& out) {
  if (steps < 1) throw UsageError("--steps must be >= 1");
  std::vector<double> as;
  for (int i = 0; i <= steps; ++i) as.push_back(double(i) / steps);
  std::vector<std::complex<double>> etas;
  // Real axis, then the special curve cos(alpha) e^{i alpha}.
  for (int i = 0; i < steps; ++i) etas.emplace_back(double(i) / steps, 0.0);
  for (int i = 1; i <= steps; ++i) {
    const double alpha = std::numbers::pi / 2.0 * double(i) / (steps + 1);
    etas.push_back(std::cos(alpha) * std::polar(1.0, alpha));
  }
  const auto rows = inertial_regime_map(etas, as);
  ensure_dir(cfg.out);
  const auto path = cfg.out / "regime.csv";
  std::ofstream csv(path);
  if (!csv) throw Error(Errc::IoError, "cannot write " + path.string());
  write_regime_csv(rows, csv);
  std::size_t converging = 0, accelerating = 0;
  for (const auto& r : rows) {
    converging += r.converges;
    accelerating += r.accelerates;
  }
  out << "rows=" << rows.size() << " converges=" << converging
      << " accelerates=" << accelerating << " table=" << path.string()
      << '\n';
  return 0;
}

int cmd_inpaint(RunConfig cfg, int iters, std::ostream& out) {
  cfg.problem = "tv";
  if (cfg.solvers.empty()) cfg.solvers = {"admm", "iadmm:0.3", "a3dmm:6:100"};
  cfg.max_iter = iters;
  cfg.validate(true);
  ProblemInstance inst = build_problem(cfg);
  SolverConfig solver = solver_config(cfg, inst);
  ensure_dir(cfg.out);
  const MatrixXd& img = *inst.image;
  {
    MatrixXd observed = unvec_image(inst.mask->cwiseProduct(*inst.ground_truth),
                                    img.rows(), img.cols());
    std::ofstream f(cfg.out / "observed.pgm", std::ios::binary);
    f << encode_pgm(observed);
  }
  out << inst.descriptor << " gamma=" << format_double(solver.gamma)
      << " iterations=" << iters << '\n';
  for (const auto& s : cfg.solvers) {
    const SolverSpec spec = SolverSpec::parse(s);
    RunResult r = run_solver(inst, spec, solver, cfg);
    const MatrixXd est = unvec_image(r.state.x, img.rows(), img.cols());
    const double p = psnr(est, img);
    std::string stem = spec.id();
    for (char& c : stem) {
      if (c == ':') c = '_';
    }
    std::ofstream f(cfg.out / (stem + ".pgm"), std::ios::binary);
    f << encode_pgm(est);
    write_trace_csv(r.trace, cfg.out / (stem + ".csv"));
    out << std::left << std::setw(14) << spec.id() << " psnr=" << std::fixed
        << std::setprecision(4) << p << std::defaultfloat << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"ADMM with trajectory-following extrapolation", "a3dmm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  CommonFlags flags;
  std::string problem, solver_text;

  auto* solve = app.add_subcommand("solve", "run one solver on one problem");
  flags.attach(solve);
  solve->add_option("--problem", problem, "problem name");
  solve->add_option("--solver", solver_text,
                    "admm | iadmm:a | iadmm3:a:b | a3dmm:q:s | rre:q");

  auto* bench = app.add_subcommand("bench", "compare solvers from a config");
  flags.attach(bench);
  bench->add_option("--problem", problem, "problem name");

  auto* angles = app.add_subcommand("angles", "trajectory angle diagnostics");
  flags.attach(angles);
  angles->add_option("--problem", problem, "problem name");

  int steps = 100;
  auto* spectra = app.add_subcommand("spectra", "inertial regime map as CSV");
  flags.attach(spectra);
  spectra->add_option("--steps", steps, "grid resolution")->capture_default_str();

  int iters = 30;
  auto* inpaint = app.add_subcommand("inpaint", "TV inpainting comparison");
  flags.attach(inpaint);
  inpaint->add_option("--iters", iters, "outer iterations")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    RunConfig base;
    if (!problem.empty()) base.problem = problem;
    if (inpaint->parsed()) base.tol = 1e-14;
    const RunConfig cfg = flags.resolve(base);
    if (solve->parsed()) return cmd_solve(cfg, solver_text, out);
    if (bench->parsed()) return cmd_bench(cfg, out);
    if (angles->parsed()) return cmd_angles(cfg, out);
    if (spectra->parsed()) return cmd_spectra(cfg, steps, out);
    if (inpaint->parsed()) return cmd_inpaint(cfg, iters, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace a3dmm::cli
