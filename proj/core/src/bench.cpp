#include "a3dmm/bench.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>

#include "a3dmm/error.hpp"

#ifndef A3DMM_VERSION
#define A3DMM_VERSION "0.0.0"
#endif

namespace a3dmm {

std::string version_string() { return "a3dmm " A3DMM_VERSION; }

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_number(const std::string& key, const std::string& value) {
  try {
    return parse_double(trim(value));
  } catch (const Error&) {
    throw Error(Errc::ConfigError, key + ": expected a number, got '" + value +
                                       "'");
  }
}

long long to_integer(const std::string& key, const std::string& value) {
  const double x = to_number(key, value);
  if (std::floor(x) != x || std::abs(x) > 9e15) {
    throw Error(Errc::ConfigError, key + ": expected an integer, got '" +
                                       value + "'");
  }
  return static_cast<long long>(x);
}

bool to_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw Error(Errc::ConfigError, key + ": expected on/off, got '" + value + "'");
}

}  // namespace

std::optional<int> parse_depth(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity" || t == "∞") return std::nullopt;
  const long long v = to_integer("s", t);
  if (v < 1 || v > 1000000) {
    throw Error(Errc::ConfigError, "s: must be a positive integer or inf");
  }
  return static_cast<int>(v);
}

SolverSpec SolverSpec::parse(const std::string& text) {
  const auto parts = split(trim(text), ':');
  if (parts.empty()) throw Error(Errc::ConfigError, "empty solver spec");
  SolverSpec spec;
  const std::string& head = parts[0];
  auto need = [&](std::size_t n) {
    if (parts.size() != n) {
      throw Error(Errc::ConfigError, "solver '" + text + "': expected " +
                                         std::to_string(n - 1) +
                                         " parameters");
    }
  };
  if (head == "admm") {
    need(1);
  } else if (head == "iadmm") {
    need(2);
    spec.kind = Kind::Inertial;
    spec.inertial.a = to_number("solver " + text, parts[1]);
  } else if (head == "iadmm3") {
    need(3);
    spec.kind = Kind::Inertial;
    spec.inertial.a = to_number("solver " + text, parts[1]);
    spec.inertial.b = to_number("solver " + text, parts[2]);
  } else if (head == "a3dmm" || head == "rre") {
    spec.kind = Kind::A3dmm;
    spec.extrap = ExtrapConfig{};
    if (head == "rre") {
      need(2);
      spec.extrap.rre = true;
    } else {
      need(3);
      spec.extrap.s = parse_depth(parts[2]);
    }
    const long long q = to_integer("solver " + text, parts[1]);
    if (q < 1 || q > 32) {
      throw Error(Errc::ConfigError, "solver '" + text + "': q out of range");
    }
    spec.extrap.q = static_cast<int>(q);
  } else {
    throw Error(Errc::ConfigError, "unknown solver '" + text + "'");
  }
  if (spec.kind == Kind::Inertial && !(spec.inertial.a >= 0.0)) {
    throw Error(Errc::ConfigError, "solver '" + text + "': a must be >= 0");
  }
  return spec;
}

std::string SolverSpec::id() const {
  switch (kind) {
    case Kind::Admm: return "admm";
    case Kind::Inertial:
      return inertial.b == 0.0 ? "iadmm:" + format_double(inertial.a)
                               : "iadmm3:" + format_double(inertial.a) + ":" +
                                     format_double(inertial.b);
    case Kind::A3dmm:
      if (extrap.rre) return "rre:" + std::to_string(extrap.q);
      return "a3dmm:" + std::to_string(extrap.q) + ":" +
             (extrap.s ? std::to_string(*extrap.s) : std::string("inf"));
  }
  return "admm";
}

GammaRule GammaRule::parse(const std::string& text) {
  const std::string t = trim(text);
  GammaRule rule;
  if (t.rfind("knorm", 0) == 0) {
    if (t.size() < 7 || (t[5] != '+' && t[5] != '/')) {
      throw Error(Errc::ConfigError,
                  "gamma: expected knorm+<c> or knorm/<c>, got '" + t + "'");
    }
    rule.kind = t[5] == '+' ? Kind::NormPlus : Kind::NormOver;
    rule.value = to_number("gamma", t.substr(6));
  } else {
    rule.value = to_number("gamma", t);
  }
  if (rule.kind == Kind::NormOver && !(rule.value > 0.0)) {
    throw Error(Errc::ConfigError, "gamma: divisor must be > 0");
  }
  if (rule.kind == Kind::Absolute && !(rule.value > 0.0)) {
    throw Error(Errc::ConfigError, "gamma: must be > 0");
  }
  return rule;
}

double GammaRule::resolve(double k_norm_sq) const {
  switch (kind) {
    case Kind::Absolute: return value;
    case Kind::NormPlus: return k_norm_sq + value;
    case Kind::NormOver: return k_norm_sq / value;
  }
  return value;
}

std::string GammaRule::text() const {
  switch (kind) {
    case Kind::Absolute: return format_double(value);
    case Kind::NormPlus: return "knorm+" + format_double(value);
    case Kind::NormOver: return "knorm/" + format_double(value);
  }
  return format_double(value);
}

namespace {

const char* const kProblemParams[] = {
    "m",    "n",       "sparsity", "block", "rows",  "cols",
    "rank", "measurements", "mu",  "alpha", "size",  "density",
    "image", "data",   "regularizer"};

}  // namespace

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "problem") {
    problem = value;
  } else if (key == "seed") {
    const long long v = to_integer(key, value);
    if (v < 0) throw Error(Errc::ConfigError, "seed: must be >= 0");
    seed = static_cast<std::uint64_t>(v);
  } else if (key == "gamma") {
    gamma = GammaRule::parse(value);
  } else if (key == "variant") {
    try {
      variant = parse_variant(value);
    } catch (const Error&) {
      throw Error(Errc::ConfigError, "variant: unknown '" + value + "'");
    }
  } else if (key == "phi") {
    phi = to_number(key, value);
  } else if (key == "q") {
    const long long v = to_integer(key, value);
    if (v < 1 || v > 32) throw Error(Errc::ConfigError, "q: must be in [1,32]");
    q = static_cast<int>(v);
    extrapolate = true;
  } else if (key == "s") {
    s = parse_depth(value);
    extrapolate = true;
  } else if (key == "extrapolate") {
    extrapolate = to_bool(key, value);
  } else if (key == "safeguard") {
    safeguard = to_bool(key, value);
  } else if (key == "safeguard_b") {
    safeguard_b = to_number(key, value);
  } else if (key == "safeguard_delta") {
    safeguard_delta = to_number(key, value);
  } else if (key == "inner_steps") {
    inner_steps = static_cast<int>(to_integer(key, value));
  } else if (key == "tol") {
    tol = to_number(key, value);
  } else if (key == "max_iter") {
    max_iter = static_cast<int>(to_integer(key, value));
  } else if (key == "solvers") {
    solvers.clear();
    for (const auto& s : split(value, ',')) {
      if (!trim(s).empty()) solvers.push_back(trim(s));
    }
  } else if (key == "plot") {
    plots.clear();
    for (const auto& s : split(value, ',')) {
      if (!trim(s).empty()) plots.push_back(trim(s));
    }
  } else if (key == "out") {
    out = value;
  } else if (key == "parallel") {
    parallel = to_bool(key, value);
  } else {
    for (const char* p : kProblemParams) {
      if (key == p) {
        params[key] = value;
        return;
      }
    }
    throw Error(Errc::ConfigError, "unknown key '" + key + "'");
  }
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::ConfigError, origin + ":" + std::to_string(line_no) +
                                         ": expected key=value");
    }
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(Errc::ConfigError,
                  origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  load_text(buf.str(), path.string());
}

void RunConfig::validate(bool need_solvers) const {
  static const char* const known[] = {"lasso",       "affine-l1", "affine-l12",
                                      "affine-nuclear", "qp",     "feasibility",
                                      "tv",          "libsvm"};
  bool ok = false;
  for (const char* k : known) ok = ok || problem == k;
  if (!ok) throw Error(Errc::ConfigError, "problem: unknown '" + problem + "'");
  if (!(tol > 0.0)) throw Error(Errc::ConfigError, "tol: must be > 0");
  if (max_iter < 1) throw Error(Errc::ConfigError, "max_iter: must be >= 1");
  if (inner_steps < 1) {
    throw Error(Errc::ConfigError, "inner_steps: must be >= 1");
  }
  if (variant == Variant::Relaxed && !(phi > 0.0 && phi < 2.0)) {
    throw Error(Errc::ConfigError, "phi: must lie in ]0,2[");
  }
  if (safeguard_b && !(*safeguard_b > 0.0)) {
    throw Error(Errc::ConfigError, "safeguard_b: must be > 0");
  }
  if (!(safeguard_delta > 0.0)) {
    throw Error(Errc::ConfigError, "safeguard_delta: must be > 0");
  }
  if (need_solvers && solvers.empty()) {
    throw Error(Errc::ConfigError, "solvers: comparison set is empty");
  }
  for (const auto& s : solvers) {
    try {
      SolverSpec::parse(s);
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, std::string("solvers: ") + e.what());
    }
  }
  for (const auto& p : plots) {
    try {
      parse_quantity(p);
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, std::string("plot: ") + e.what());
    }
  }
  if (problem == "libsvm" && !params.count("data")) {
    throw Error(Errc::ConfigError, "data: libsvm problem needs a data file");
  }
}

double RunConfig::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : to_number(key, it->second);
}

std::string RunConfig::param_text(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace {

Index index_param(const RunConfig& c, const std::string& key, Index fallback) {
  const double v = c.param(key, static_cast<double>(fallback));
  if (v < 0 || std::floor(v) != v) {
    throw Error(Errc::ConfigError, key + ": expected a non-negative integer");
  }
  return static_cast<Index>(v);
}

}  // namespace

ProblemInstance build_problem(const RunConfig& c) {
  const std::string& p = c.problem;
  if (p == "lasso") {
    return make_lasso(index_param(c, "m", 64), index_param(c, "n", 256),
                      index_param(c, "sparsity", 13),
                      c.param("mu", kDeskLassoMu), c.seed);
  }
  if (p.rfind("affine-", 0) == 0) {
    const Regularizer reg = parse_regularizer(p.substr(7));
    AffineShape s = AffineShape::desk(reg);
    s.m = index_param(c, "m", s.m);
    s.n = index_param(c, "n", s.n);
    s.sparsity = index_param(c, "sparsity", s.sparsity);
    s.block = index_param(c, "block", s.block);
    s.rows = index_param(c, "rows", s.rows);
    s.cols = index_param(c, "cols", s.cols);
    s.rank = index_param(c, "rank", s.rank);
    s.measurements = index_param(c, "measurements", s.measurements);
    return make_affine_constrained(reg, s, c.seed);
  }
  if (p == "qp") return make_qp_box(index_param(c, "n", 50), c.seed);
  if (p == "feasibility") {
    return make_feasibility(c.param("alpha", std::numbers::pi / 4.0), c.seed);
  }
  if (p == "tv") {
    MatrixXd img;
    const std::string path = c.param_text("image", "");
    if (path.empty()) {
      const Index size = index_param(c, "size", 64);
      img = piecewise_constant_image(size, size, c.seed);
    } else {
      img = load_pgm_file(path);
    }
    return make_tv_inpainting(img, c.param("density", 0.5), c.seed);
  }
  if (p == "libsvm") {
    std::ifstream in(c.param_text("data", ""));
    if (!in) {
      throw Error(Errc::IoError, "cannot open " + c.param_text("data", ""));
    }
    return make_lasso_libsvm(parse_libsvm(in), c.param("mu", 1.0));
  }
  throw Error(Errc::ConfigError, "problem: unknown '" + p + "'");
}

double resolve_gamma(const RunConfig& config, const ProblemInstance& inst) {
  return config.gamma ? config.gamma->resolve(inst.k_norm_sq)
                      : inst.default_gamma;
}

namespace {

bool is_inexact(const ProblemInstance& inst) {
  return inst.problem.iterative_r.has_value();
}

}  // namespace

RunResult run_solver(const ProblemInstance& inst, const SolverSpec& spec,
                     const SolverConfig& solver, const RunConfig& config) {
  InnerSolver inner;
  inner.max_inner_steps = config.inner_steps;
  const SplitProblem problem = is_inexact(inst)
                                   ? with_inexact_subproblem(inst.problem, inner)
                                   : inst.problem;
  RunOptions opts;
  opts.z0 = inst.z0;
  if (inst.reference) opts.reference = &*inst.reference;

  RunResult r;
  switch (spec.kind) {
    case SolverSpec::Kind::Admm:
      r = run_variant(problem, solver, ExtrapConfig::disabled(), opts);
      break;
    case SolverSpec::Kind::Inertial:
      r = run_inertial(problem, solver, spec.inertial, opts);
      break;
    case SolverSpec::Kind::A3dmm: {
      ExtrapConfig e = spec.extrap;
      e.safeguard.enabled = config.safeguard;
      e.safeguard.b = config.safeguard_b;
      e.safeguard.delta = config.safeguard_delta;
      r = run_variant(problem, solver, e, opts);
      break;
    }
  }
  r.trace.set_meta("solver", spec.id());
  r.trace.set_meta("seed", std::to_string(inst.seed));
  r.trace.set_meta("problem", inst.descriptor);
  r.trace.set_meta("version", version_string());
  return r;
}

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate(true);
  std::vector<SolverSpec> specs;
  for (const auto& s : config.solvers) specs.push_back(SolverSpec::parse(s));

  ExperimentResult result{build_problem(config), {}};
  ProblemInstance& inst = result.instance;
  SolverConfig solver;
  solver.gamma = resolve_gamma(config, inst);
  solver.variant = config.variant;
  solver.phi = config.phi;
  solver.tol = config.tol;
  solver.max_iter = config.max_iter;
  solver.validate();

  if (!inst.reference) {
    SolverConfig ref = solver;
    ref.variant = Variant::Standard;
    ref.tol = config.tol / 100.0;
    ref.max_iter = 10 * config.max_iter;
    RunResult r = run_solver(inst, SolverSpec{}, ref, config);
    inst.reference = Reference{r.state.z, r.state.x};
  }

  const ProblemInstance& frozen = inst;
  if (config.parallel && specs.size() > 1) {
    std::vector<std::future<RunResult>> jobs;
    for (const auto& spec : specs) {
      jobs.push_back(std::async(std::launch::async, [&frozen, spec, solver,
                                                     &config] {
        return run_solver(frozen, spec, solver, config);
      }));
    }
    for (auto& j : jobs) result.traces.push_back(j.get().trace);
  } else {
    for (const auto& spec : specs) {
      result.traces.push_back(run_solver(frozen, spec, solver, config).trace);
    }
  }
  return result;
}

namespace {

std::string file_stem(const std::string& id) {
  std::string s = id;
  for (char& ch : s) {
    if (ch == ':') ch = '_';
  }
  return s;
}

}  // namespace

void write_experiment(const ExperimentResult& result, const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec) {
    throw Error(Errc::IoError, "cannot create " + config.out.string() + ": " +
                                   ec.message());
  }
  for (const auto& t : result.traces) {
    write_trace_csv(t, config.out / (file_stem(t.meta("solver").value_or(
                                         "run")) +
                                     ".csv"));
  }
  for (const auto& q : config.plots) {
    emit_plot_svg(result.traces, parse_quantity(q),
                  config.out / (q + ".svg"));
  }
}

}  // namespace a3dmm
