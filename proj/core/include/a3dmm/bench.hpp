#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "a3dmm/accel.hpp"
#include "a3dmm/problems.hpp"
#include "a3dmm/trace.hpp"

namespace a3dmm {

std::string version_string();

/// One entry of a comparison set, e.g. "admm", "iadmm:0.3",
/// "iadmm3:0.4:-0.2", "a3dmm:6:100", "a3dmm:6:inf", "rre:6".
struct SolverSpec {
  enum class Kind { Admm, Inertial, A3dmm };
  Kind kind = Kind::Admm;
  InertialConfig inertial;
  ExtrapConfig extrap = ExtrapConfig::disabled();

  static SolverSpec parse(const std::string& text);
  std::string id() const;
};

/// gamma = value, |K|^2 + value, or |K|^2 / value.
struct GammaRule {
  enum class Kind { Absolute, NormPlus, NormOver };
  Kind kind = Kind::Absolute;
  double value = 1.0;

  /// "1.5", "knorm+0.1", "knorm/10".
  static GammaRule parse(const std::string& text);
  double resolve(double k_norm_sq) const;
  std::string text() const;
};

/// Flat key=value configuration; '#' starts a comment.
///
///   problem     lasso | affine-l1 | affine-l12 | affine-nuclear | qp |
///               feasibility | tv | libsvm
///   seed        integer
///   m, n, sparsity, mu              lasso / affine sizes
///   alpha                           feasibility angle (radians)
///   size, density, image            tv inpainting (image: PGM path)
///   data                            libsvm file
///   gamma       see GammaRule (default: per problem)
///   variant     standard | relaxed | symmetric;  phi
///   q, s        extrapolation for `solve` (s integer or inf)
///   safeguard   on | off; safeguard_b, safeguard_delta
///   inner_steps TV inner solver steps
///   tol, max_iter
///   solvers     comma separated SolverSpec list for `bench`
///   plot        comma separated quantities for SVG output
///   out         output directory
///   parallel    true | false
struct RunConfig {
  std::string problem = "lasso";
  std::uint64_t seed = 1;
  std::map<std::string, std::string> params;
  std::optional<GammaRule> gamma;
  Variant variant = Variant::Standard;
  double phi = 1.0;
  int q = 6;
  std::optional<int> s;
  bool extrapolate = false;
  bool safeguard = false;
  std::optional<double> safeguard_b;
  double safeguard_delta = 3.0;
  int inner_steps = 10;
  double tol = 1e-10;
  int max_iter = 2000;
  std::vector<std::string> solvers;
  std::vector<std::string> plots;
  std::filesystem::path out = "out";
  bool parallel = false;

  /// Applies one key=value pair; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  void load(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& origin = "config");
  /// Throws ConfigError naming the offending field.
  void validate(bool need_solvers) const;

  double param(const std::string& key, double fallback) const;
  std::string param_text(const std::string& key,
                         const std::string& fallback) const;
};

/// Accepts a non-negative integer or "inf".
std::optional<int> parse_depth(const std::string& text);

ProblemInstance build_problem(const RunConfig& config);
double resolve_gamma(const RunConfig& config, const ProblemInstance& inst);

/// Runs one solver spec against a prepared instance.
RunResult run_solver(const ProblemInstance& inst, const SolverSpec& spec,
                     const SolverConfig& solver, const RunConfig& config);

struct ExperimentResult {
  ProblemInstance instance;
  std::vector<Trace> traces;
};

/// Builds the problem, computes the reference with 10x the iteration budget
/// at tol/100, then runs every solver of the comparison set.
ExperimentResult run_experiment(const RunConfig& config);

/// Writes trace CSVs and SVG plots into config.out.
void write_experiment(const ExperimentResult& result, const RunConfig& config);

enum class PlotQuantity { NormV, CosTheta, OneMinusCos, DistZ, DistX, Objective };

PlotQuantity parse_quantity(const std::string& text);
std::string to_string(PlotQuantity q);

/// Standalone SVG; log-scale y for distances and |v|. Throws EmptySelection
/// if no trace carries the quantity.
std::string render_plot_svg(const std::vector<Trace>& traces,
                            PlotQuantity quantity);
void emit_plot_svg(const std::vector<Trace>& traces, PlotQuantity quantity,
                   const std::filesystem::path& path);

}  // namespace a3dmm
