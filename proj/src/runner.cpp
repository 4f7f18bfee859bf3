#include "heatctl/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "heatctl/oracle.hpp"
#include "heatctl/pde.hpp"
#include "heatctl/reach.hpp"
#include "heatctl/solvers.hpp"

namespace heatctl {

using nlohmann::json;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"simulate", "gamma",         "minnorm",  "mintime",
                                                 "equivalence", "sweep", "oracle-compare", "gradcheck"};
  return names;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json point_json(const ValuePoint& p) {
  return {{"parameter", p.parameter},
          {"value", p.value},
          {"bracket_lo", p.bracket_lo},
          {"bracket_hi", p.bracket_hi},
          {"bracket_width", p.bracket_width()},
          {"oracle_value", optional_json(p.oracle_value)},
          {"iterations", p.iterations},
          {"oracle_calls", p.oracle_calls},
          {"oracle_iterations", p.oracle_iterations},
          {"inconclusive", p.inconclusive},
          {"control_horizon", p.control_horizon}};
}

json solver_json(const SolverOptions& o) {
  return {{"steps", o.reach.steps},         {"tol_T_rel", o.tol_T_rel},
          {"tol_M_rel", o.tol_M_rel},       {"max_iters", o.reach.max_iters},
          {"feas_rel", o.reach.feas_rel},   {"stagnation_tol", o.reach.stagnation_tol},
          {"gamma_steps", o.gamma_steps}};
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot write " + path.string());
    out_ << header << '\n';
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(const std::optional<double>& x) { return x ? format_double(*x) : ""; }
  std::ofstream out_;
};

void write_control_norms(const ControlSignal& u, const SpatialGrid& g, const std::filesystem::path& path) {
  CsvWriter csv(path, "k,t,norm");
  for (std::size_t k = 0; k < u.nt(); ++k) csv.row(k, u.dt() * static_cast<double>(k), u.pointwise_norm(k, g));
}

/// The closed-form one-mode reduction applies to f = 0, omega = Omega, y0 = a e_1.
std::optional<ScalarInstance> scalar_instance(const Problem& p) {
  if (!p.f.is_linear() || !p.grid.omega_is_domain()) return std::nullopt;
  const Vector e1 = eigenmode(p.grid, 1);
  const double a = inner(p.y0, e1, p.grid);
  Vector rest = p.y0;
  for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= a * e1[i];
  if (l2_norm(rest, p.grid) > 1e-12 * l2_norm(p.y0, p.grid)) return std::nullopt;
  return ScalarInstance(std::abs(a), p.ball.r(), first_eigenvalue(p.grid));
}

double require_value(const std::optional<double>& v, const char* field) {
  if (!v) throw ConfigError({std::string(field) + ": required for this subcommand"});
  return *v;
}

json run_simulate(const ExperimentConfig& cfg, const Problem& p, const std::filesystem::path& out) {
  const double lam = first_eigenvalue(p.grid);
  const double n0 = l2_norm(p.y0, p.grid);
  const double horizon = cfg.simulate.horizon > 0.0 ? cfg.simulate.horizon : 1.5 * std::log(n0 / p.ball.r()) / lam;
  const std::size_t steps = cfg.simulate.steps;
  const auto y = solve_free(p.y0, horizon / static_cast<double>(steps), steps, p.f, p.grid);
  const DecayReport decay = decay_envelope_check(y, p.grid, cfg.simulate.tol);
  const H1Report h1 = validate_h1(p.f, linspace(-50.0, 50.0, 10001));

  CsvWriter csv(out / "trajectory.csv", "k,t,norm,envelope");
  for (std::size_t k = 0; k <= steps; ++k)
    csv.row(k, y.time(k), y.norms()[k], std::exp(-lam * y.time(k)) * n0);

  return {{"horizon", horizon},
          {"steps", steps},
          {"dt", y.dt()},
          {"lambda1", lam},
          {"initial_norm", n0},
          {"terminal_norm", y.norms().back()},
          {"hitting_time", optional_json(hitting_time(y, p.ball))},
          {"decay",
           {{"max_excess", decay.max_excess},
            {"max_relative_gap", decay.max_relative_gap},
            {"max_ratio", decay.max_ratio},
            {"tol", cfg.simulate.tol},
            {"pass", decay.pass}}},
          {"h1",
           {{"max_abs_derivative", h1.max_abs_derivative},
            {"min_sign_product", h1.min_sign_product},
            {"pass", h1.pass}}}};
}

json run_gamma(const ExperimentConfig& cfg, const Problem& p) {
  const double g0 = gamma(p, cfg.solver);
  json out = {{"gamma", g0}, {"lambda1", first_eigenvalue(p.grid)}, {"oracle_gamma", nullptr}};
  if (const auto inst = scalar_instance(p)) out["oracle_gamma"] = inst->gamma();
  return out;
}

json run_minnorm(const ExperimentConfig& cfg, const Problem& p, const std::filesystem::path& out) {
  const double horizon = require_value(cfg.horizon, "experiment.T");
  const double g0 = gamma(p, cfg.solver);
  ValuePoint vp = minimal_norm(horizon, p, cfg.solver, g0);
  if (const auto inst = scalar_instance(p); inst && horizon <= inst->gamma()) vp.oracle_value = scalar_alpha(*inst, horizon);
  write_control_norms(vp.control, p.grid, out / "control_norms.csv");
  return {{"gamma", g0},
          {"T", horizon},
          {"alpha", vp.value},
          {"point", point_json(vp)},
          {"bangbang_fraction", vp.value > 0.0 ? json(bangbang_report(vp.control, vp.value, 0.05, p.grid)) : json(nullptr)}};
}

json run_mintime(const ExperimentConfig& cfg, const Problem& p, const std::filesystem::path& out) {
  const double bound = require_value(cfg.bound, "experiment.M");
  const double g0 = gamma(p, cfg.solver);
  ValuePoint vp = minimal_time(bound, p, cfg.solver, g0);
  if (const auto inst = scalar_instance(p)) vp.oracle_value = scalar_tau(*inst, bound);
  write_control_norms(vp.control, p.grid, out / "control_norms.csv");
  return {{"gamma", g0},
          {"M", bound},
          {"tau", vp.value},
          {"point", point_json(vp)},
          {"bangbang_fraction", bound > 0.0 ? json(bangbang_report(vp.control, bound, 0.05, p.grid)) : json(nullptr)}};
}

json run_equivalence(const ExperimentConfig& cfg, const Problem& p, const std::filesystem::path& out) {
  const double g0 = gamma(p, cfg.solver);
  std::vector<std::string> bad;
  for (double t : cfg.T_grid)
    if (t > g0 * (1.0 + 1e-12))
      bad.push_back("experiment.T_grid: T = " + format_double(t) + " exceeds gamma(y0) = " + format_double(g0));
  if (!bad.empty()) throw ConfigError(std::move(bad));
  if (cfg.T_grid.empty() && cfg.M_grid.empty()) throw ConfigError({"experiment.T_grid/M_grid: at least one is required"});

  double max_residual = 0.0;
  json rows_t = json::array();
  {
    CsvWriter csv(out / "equivalence_T.csv",
                  "T,alpha,tau_of_alpha,residual,relative_residual,extended_hitting_time,bangbang_fraction");
    for (double t : cfg.T_grid) {
      const EquivalenceT e = verify_equivalence_T(t, p, cfg.solver, g0);
      csv.row(e.horizon, e.alpha, e.tau_of_alpha, e.residual, e.relative_residual, e.extended_hitting_time,
              e.bangbang_fraction);
      max_residual = std::max(max_residual, e.residual);
      rows_t.push_back({{"T", e.horizon},
                        {"alpha", e.alpha},
                        {"tau_of_alpha", e.tau_of_alpha},
                        {"residual", e.residual},
                        {"relative_residual", e.relative_residual},
                        {"extended_hitting_time", e.extended_hitting_time},
                        {"bangbang_fraction", e.bangbang_fraction}});
    }
  }
  json rows_m = json::array();
  {
    CsvWriter csv(out / "equivalence_M.csv", "M,tau,alpha_of_tau,relative_residual,restricted_level,restricted_feasible");
    for (double m : cfg.M_grid) {
      const EquivalenceM e = verify_equivalence_M(m, p, cfg.solver, g0);
      csv.row(e.bound, e.tau, e.alpha_of_tau, e.relative_residual, e.restricted_level, e.restricted_feasible);
      max_residual = std::max(max_residual, e.relative_residual);
      rows_m.push_back({{"M", e.bound},
                        {"tau", e.tau},
                        {"alpha_of_tau", e.alpha_of_tau},
                        {"relative_residual", e.relative_residual},
                        {"restricted_level", e.restricted_level},
                        {"restricted_feasible", e.restricted_feasible}});
    }
  }
  return {{"gamma", g0}, {"max_residual", max_residual}, {"T_round_trips", rows_t}, {"M_round_trips", rows_m}};
}

json curve_json(const ValueCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(point_json(p));
  return {{"points", pts}, {"strictly_decreasing", c.strictly_decreasing}, {"non_increasing", c.non_increasing}};
}

json run_sweep(const ExperimentConfig& cfg, const Problem& p, const std::filesystem::path& out) {
  if (cfg.T_grid.empty() && cfg.M_grid.empty()) throw ConfigError({"experiment.T_grid/M_grid: at least one is required"});
  const auto inst = scalar_instance(p);
  json result = {{"gamma", gamma(p, cfg.solver)}};
  if (!cfg.M_grid.empty()) {
    ValueCurve tau = tau_curve(cfg.M_grid, p, cfg.solver);
    if (inst)
      for (auto& pt : tau.points) pt.oracle_value = scalar_tau(*inst, pt.parameter);
    export_curve(tau, out / "tau_curve.csv");
    json c = curve_json(tau);
    c["first_over_gamma"] = tau.points.front().value / tau.gamma;
    c["last_over_gamma"] = tau.points.back().value / tau.gamma;
    result["tau_curve"] = c;
  }
  if (!cfg.T_grid.empty()) {
    ValueCurve alpha = alpha_curve(cfg.T_grid, p, cfg.solver);
    if (inst)
      for (auto& pt : alpha.points)
        if (pt.parameter <= inst->gamma()) pt.oracle_value = scalar_alpha(*inst, pt.parameter);
    export_curve(alpha, out / "alpha_curve.csv");
    result["alpha_curve"] = curve_json(alpha);
  }
  return result;
}

json run_oracle_compare(const ExperimentConfig& cfg, const Problem& p, const std::filesystem::path& out) {
  const auto inst = scalar_instance(p);
  if (!inst && !cfg.bruteforce)
    throw ConfigError({"oracle-compare: needs f = zero, omega = Omega and y0 = a e_1, or an experiment.bruteforce block"});
  const double g0 = gamma(p, cfg.solver);
  CsvWriter csv(out / "oracle_compare.csv", "kind,param,solver_value,oracle_value,relative_gap");
  json rows = json::array();
  double max_gap = 0.0;
  auto record = [&](const char* kind, double param, double solver, double oracle) {
    const double gap = std::abs(solver - oracle) / std::max(std::abs(oracle), 1e-300);
    max_gap = std::max(max_gap, gap);
    csv.row(kind, param, solver, oracle, gap);
    rows.push_back({{"kind", kind}, {"param", param}, {"solver_value", solver}, {"oracle_value", oracle},
                    {"relative_gap", gap}});
  };
  if (inst) {
    for (double m : cfg.M_grid) record("tau", m, minimal_time(m, p, cfg.solver, g0).value, scalar_tau(*inst, m));
    for (double t : cfg.T_grid)
      if (t < inst->gamma()) record("alpha", t, minimal_norm(t, p, cfg.solver, g0).value, scalar_alpha(*inst, t));
  }
  json result = {{"gamma", g0}, {"rows", rows}, {"max_relative_gap", max_gap}, {"bruteforce", nullptr}};
  if (cfg.bruteforce) {
    const double horizon = require_value(cfg.horizon, "experiment.T");
    BruteForceOptions bo;
    bo.k_modes = cfg.bruteforce->k_modes;
    bo.m_intervals = cfg.bruteforce->m_intervals;
    bo.amp_grid = cfg.bruteforce->amp_grid;
    bo.steps = cfg.bruteforce->steps;
    const BruteForceBracket br = galerkin_bruteforce_alpha(p.y0, horizon, bo, p.f, p.grid, p.ball);
    const double alpha = minimal_norm(horizon, p, cfg.solver, g0).value;
    result["bruteforce"] = {{"T", horizon},
                            {"lower", optional_json(br.lower)},
                            {"upper", optional_json(br.upper)},
                            {"candidates", br.candidates},
                            {"solver_alpha", alpha},
                            {"contains_solver_alpha", br.contains(alpha)}};
  }
  return result;
}

json run_gradcheck(const ExperimentConfig& cfg, const Problem& p, const std::filesystem::path& out) {
  const auto& gc = cfg.gradcheck;
  const std::size_t nt = cfg.solver.reach.steps;
  const double dt = gc.horizon / static_cast<double>(nt);
  const double eps = gc.eps > 0.0 ? gc.eps : default_fd_step(p.f);
  std::mt19937_64 rng(gc.seed);
  const double threshold = p.f.is_linear() ? 1e-9 : 1e-6;
  CsvWriter csv(out / "gradcheck.csv", "pair,adjoint_derivative,fd_derivative,relative_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < gc.pairs; ++i) {
    const ControlSignal v = random_smooth_control(p.grid, dt, nt, gc.bound, rng);
    const ControlSignal d = random_smooth_control(p.grid, dt, nt, 1.0, rng);
    const GradientCheck chk = gradient_fd_check(p.y0, v, d, p.f, p.grid, eps);
    worst = std::max(worst, chk.relative_error);
    csv.row(i, chk.adjoint_derivative, chk.fd_derivative, chk.relative_error);
  }
  return {{"pairs", gc.pairs}, {"eps", eps}, {"max_relative_error", worst}, {"threshold", threshold},
          {"pass", worst <= threshold}};
}

}  // namespace

json run_experiment(const std::string& subcommand, const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    throw ConfigError({"subcommand: unknown '" + subcommand + "'"});
  const Problem p = cfg.problem();
  std::filesystem::create_directories(out_dir);

  const auto start = std::chrono::steady_clock::now();
  json outputs;
  if (subcommand == "simulate") outputs = run_simulate(cfg, p, out_dir);
  else if (subcommand == "gamma") outputs = run_gamma(cfg, p);
  else if (subcommand == "minnorm") outputs = run_minnorm(cfg, p, out_dir);
  else if (subcommand == "mintime") outputs = run_mintime(cfg, p, out_dir);
  else if (subcommand == "equivalence") outputs = run_equivalence(cfg, p, out_dir);
  else if (subcommand == "sweep") outputs = run_sweep(cfg, p, out_dir);
  else if (subcommand == "oracle-compare") outputs = run_oracle_compare(cfg, p, out_dir);
  else outputs = run_gradcheck(cfg, p, out_dir);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json record = {{"config_hash", config_hash(cfg.document)},
                 {"experiment", subcommand},
                 {"outputs", outputs},
                 {"diagnostics",
                  {{"solver", solver_json(cfg.solver)},
                   {"grid", {{"ell", cfg.ell}, {"n", cfg.n}, {"h", p.grid.h()}}},
                   {"nonlinearity", {{"kind", to_string(cfg.kind)}, {"L", p.f.lipschitz()}}},
                   {"initial_norm", l2_norm(p.y0, p.grid)},
                   {"r", cfg.r}}},
                 {"wall_time_seconds", wall}};
  std::ofstream f(out_dir / "summary.json", std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + (out_dir / "summary.json").string());
  f << record.dump(2) << '\n';
  return record;
}

int run(const RunRequest& req, std::ostream& log) {
  try {
    std::vector<std::string> overrides = req.overrides;
    if (req.value) {
      if (req.subcommand == "minnorm") overrides.push_back("experiment.T=" + format_double(*req.value));
      else if (req.subcommand == "mintime") overrides.push_back("experiment.M=" + format_double(*req.value));
    }
    const ExperimentConfig cfg = load_config(req.config, overrides);
    const json record = run_experiment(req.subcommand, cfg, req.out_dir);
    log << req.subcommand << ": wrote " << (req.out_dir / "summary.json").string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    log << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const H2Violation& e) {
    log << e.what() << '\n';
    return kExitH2Violation;
  } catch (const ArgumentError& e) {
    log << "invalid argument: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace heatctl
