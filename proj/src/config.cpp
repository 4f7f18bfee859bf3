#include "heatctl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "heatctl/pde.hpp"

namespace heatctl {

using nlohmann::json;

namespace {

std::string join_diagnostics(const std::vector<std::string>& d) {
  std::string out = "invalid configuration:";
  for (const auto& line : d) out += "\n  " + line;
  return out;
}

/// Typed field access that records a diagnostic instead of throwing.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& diag) : diag_(diag) {}

  const json* child(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) {
      diag_.push_back(path + ": expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  double number(const json& obj, const std::string& key, const std::string& path, double fallback) {
    const json* v = child(obj, key, path);
    if (v == nullptr) return fallback;
    if (!v->is_number()) {
      diag_.push_back(path + "." + key + ": expected a number");
      return fallback;
    }
    return v->get<double>();
  }

  std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& path) {
    const json* v = child(obj, key, path);
    if (v == nullptr || v->is_null()) return std::nullopt;
    if (!v->is_number()) {
      diag_.push_back(path + "." + key + ": expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::size_t count(const json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
    const json* v = child(obj, key, path);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      diag_.push_back(path + "." + key + ": expected a nonnegative integer");
      return fallback;
    }
    return v->get<std::size_t>();
  }

  Vector numbers(const json& obj, const std::string& key, const std::string& path) {
    const json* v = child(obj, key, path);
    if (v == nullptr) return {};
    if (!v->is_array()) {
      diag_.push_back(path + "." + key + ": expected an array of numbers");
      return {};
    }
    Vector out;
    for (const auto& e : *v) {
      if (!e.is_number()) {
        diag_.push_back(path + "." + key + ": expected an array of numbers");
        return {};
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  std::vector<std::string>& diag_;
};

const json& object_or_empty(const json& doc, const std::string& key) {
  static const json empty = json::object();
  auto it = doc.find(key);
  return it != doc.end() && it->is_object() ? *it : empty;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

Vector read_vector_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vector file " + path.string());
  Vector out;
  double x = 0.0;
  while (in >> x) out.push_back(x);
  if (!in.eof()) throw Error("vector file " + path.string() + " contains a non-numeric token");
  return out;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  std::vector<std::string> diag;
  Reader rd(diag);
  ExperimentConfig c;
  if (!doc.is_object()) throw ConfigError({"<root>: expected a JSON object"});
  c.document = doc;

  for (const auto& [key, _] : doc.items()) {
    static const std::vector<std::string> known = {"grid", "omega", "nonlinearity", "y0", "r",
                                                   "time", "solver", "experiment", "description"};
    if (std::find(known.begin(), known.end(), key) == known.end()) diag.push_back(key + ": unknown top-level key");
  }

  const json& grid = object_or_empty(doc, "grid");
  c.ell = rd.number(grid, "ell", "grid", 1.0);
  c.n = rd.count(grid, "n", "grid", 127);
  if (!(c.ell > 0.0)) diag.push_back("grid.ell: must be positive");
  if (c.n < 3) diag.push_back("grid.n: need at least 3 interior nodes");

  const json& omega = object_or_empty(doc, "omega");
  c.omega_a = rd.number(omega, "a", "omega", 0.0);
  c.omega_b = rd.number(omega, "b", "omega", c.ell);
  if (!(c.omega_a >= 0.0 && c.omega_a < c.omega_b && c.omega_b <= c.ell))
    diag.push_back("omega: need 0 <= a < b <= grid.ell");

  const json& nl = object_or_empty(doc, "nonlinearity");
  if (const json* kind = rd.child(nl, "kind", "nonlinearity")) {
    if (!kind->is_string()) {
      diag.push_back("nonlinearity.kind: expected a string");
    } else {
      try {
        c.kind = nonlinearity_kind_from_string(kind->get<std::string>());
      } catch (const ArgumentError& e) {
        diag.push_back(std::string("nonlinearity.kind: ") + e.what());
      }
    }
  }
  c.lipschitz = rd.number(nl, "L", "nonlinearity", c.kind == NonlinearityKind::zero ? 0.0 : 1.0);
  if (!(c.lipschitz >= 0.0)) diag.push_back("nonlinearity.L: must be >= 0");

  const json& y0 = object_or_empty(doc, "y0");
  if (const json* modes = rd.child(y0, "modes", "y0")) {
    if (!modes->is_object()) {
      diag.push_back("y0.modes: expected an object mapping mode index to coefficient");
    } else {
      for (const auto& [key, val] : modes->items()) {
        std::size_t idx = 0;
        const auto res = std::from_chars(key.data(), key.data() + key.size(), idx);
        if (res.ec != std::errc() || res.ptr != key.data() + key.size() || idx == 0 || idx > c.n) {
          diag.push_back("y0.modes." + key + ": mode index must be an integer in 1..grid.n");
          continue;
        }
        if (!val.is_number()) {
          diag.push_back("y0.modes." + key + ": expected a number");
          continue;
        }
        c.y0_modes[idx] = val.get<double>();
      }
    }
  }
  if (const json* file = rd.child(y0, "file", "y0")) {
    if (!file->is_string()) {
      diag.push_back("y0.file: expected a path string");
    } else {
      std::filesystem::path p = file->get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      try {
        c.y0_values = read_vector_file(p);
        if (c.y0_values->size() != c.n)
          diag.push_back("y0.file: expected " + std::to_string(c.n) + " values, found " +
                         std::to_string(c.y0_values->size()));
      } catch (const Error& e) {
        diag.push_back(std::string("y0.file: ") + e.what());
      }
    }
  }
  if (c.y0_modes.empty() && !c.y0_values) diag.push_back("y0: provide 'modes' or 'file'");
  if (!c.y0_modes.empty() && c.y0_values) diag.push_back("y0: 'modes' and 'file' are mutually exclusive");

  if (!doc.contains("r")) diag.push_back("r: required");
  c.r = rd.number(doc, "r", "<root>", 0.5);
  if (!(c.r > 0.0)) diag.push_back("r: must be positive");

  const json& time = object_or_empty(doc, "time");
  c.solver.reach.steps = rd.count(time, "steps", "time", 400);
  if (c.solver.reach.steps < 10) diag.push_back("time.steps: need at least 10 steps");

  const json& solver = object_or_empty(doc, "solver");
  c.solver.tol_T_rel = rd.number(solver, "tol_T_rel", "solver", c.solver.tol_T_rel);
  c.solver.tol_M_rel = rd.number(solver, "tol_M_rel", "solver", c.solver.tol_M_rel);
  c.solver.max_doublings = rd.count(solver, "max_doublings", "solver", c.solver.max_doublings);
  c.solver.gamma_steps = rd.count(solver, "gamma_steps", "solver", c.solver.gamma_steps);
  c.solver.reach.max_iters = rd.count(solver, "max_iters", "solver", c.solver.reach.max_iters);
  c.solver.reach.stagnation_tol = rd.number(solver, "stagnation_tol", "solver", c.solver.reach.stagnation_tol);
  c.solver.reach.feas_rel = rd.number(solver, "feas_rel", "solver", c.solver.reach.feas_rel);
  c.solver.reach.initial_step = rd.number(solver, "initial_step", "solver", c.solver.reach.initial_step);
  if (!(c.solver.tol_T_rel > 0.0 && c.solver.tol_T_rel < 1.0)) diag.push_back("solver.tol_T_rel: must be in (0, 1)");
  if (!(c.solver.tol_M_rel > 0.0 && c.solver.tol_M_rel < 1.0)) diag.push_back("solver.tol_M_rel: must be in (0, 1)");
  try {
    c.solver.reach.validate();
  } catch (const ArgumentError& e) {
    diag.push_back(std::string("solver: ") + e.what());
  }

  const json& exp = object_or_empty(doc, "experiment");
  c.horizon = rd.optional_number(exp, "T", "experiment");
  c.bound = rd.optional_number(exp, "M", "experiment");
  if (c.horizon && !(*c.horizon > 0.0)) diag.push_back("experiment.T: must be positive");
  if (c.bound && !(*c.bound >= 0.0)) diag.push_back("experiment.M: must be >= 0");
  c.T_grid = rd.numbers(exp, "T_grid", "experiment");
  c.M_grid = rd.numbers(exp, "M_grid", "experiment");
  for (std::size_t i = 1; i < c.T_grid.size(); ++i)
    if (!(c.T_grid[i] > c.T_grid[i - 1])) diag.push_back("experiment.T_grid: must be strictly increasing");
  for (std::size_t i = 1; i < c.M_grid.size(); ++i)
    if (!(c.M_grid[i] > c.M_grid[i - 1])) diag.push_back("experiment.M_grid: must be strictly increasing");
  if (!c.T_grid.empty() && !(c.T_grid.front() > 0.0)) diag.push_back("experiment.T_grid: entries must be positive");
  if (!c.M_grid.empty() && !(c.M_grid.front() >= 0.0)) diag.push_back("experiment.M_grid: entries must be >= 0");

  const json& sim = object_or_empty(exp, "simulate");
  c.simulate.horizon = rd.number(sim, "horizon", "experiment.simulate", 0.0);
  c.simulate.steps = rd.count(sim, "steps", "experiment.simulate", 2000);
  c.simulate.tol = rd.number(sim, "tol", "experiment.simulate", 1e-3);

  const json& gc = object_or_empty(exp, "gradcheck");
  c.gradcheck.pairs = rd.count(gc, "pairs", "experiment.gradcheck", 20);
  c.gradcheck.seed = rd.count(gc, "seed", "experiment.gradcheck", 1);
  c.gradcheck.eps = rd.number(gc, "eps", "experiment.gradcheck", 0.0);
  c.gradcheck.horizon = rd.number(gc, "T", "experiment.gradcheck", 0.1);
  c.gradcheck.bound = rd.number(gc, "M", "experiment.gradcheck", 5.0);
  if (!(c.gradcheck.eps >= 0.0)) diag.push_back("experiment.gradcheck.eps: must be >= 0 (0 selects the default)");
  if (!(c.gradcheck.horizon > 0.0)) diag.push_back("experiment.gradcheck.T: must be positive");

  if (exp.contains("bruteforce")) {
    const json& bf = object_or_empty(exp, "bruteforce");
    BruteForceConfig b;
    b.k_modes = rd.count(bf, "k_modes", "experiment.bruteforce", 1);
    b.m_intervals = rd.count(bf, "m_intervals", "experiment.bruteforce", 1);
    b.amp_grid = rd.numbers(bf, "amp_grid", "experiment.bruteforce");
    b.steps = rd.count(bf, "steps", "experiment.bruteforce", c.solver.reach.steps);
    if (b.k_modes == 0 || b.k_modes > 3) diag.push_back("experiment.bruteforce.k_modes: must be in 1..3");
    if (b.m_intervals == 0 || b.m_intervals > 3) diag.push_back("experiment.bruteforce.m_intervals: must be in 1..3");
    if (b.amp_grid.empty() || b.amp_grid.size() > 21)
      diag.push_back("experiment.bruteforce.amp_grid: need 1..21 levels");
    c.bruteforce = b;
  }

  // Hypotheses, checked only once the structure is sound.
  if (diag.empty()) {
    try {
      const SpatialGrid g = c.grid();
      const Vector samples = linspace(-50.0, 50.0, 10001);
      const H1Report h1 = validate_h1(c.nonlinearity(), samples);
      if (!h1.pass) diag.push_back("nonlinearity: fails (H1) on [-50, 50]");
      (void)g;
    } catch (const Error& e) {
      diag.push_back(std::string("grid/omega: ") + e.what());
    }
  }
  if (!diag.empty()) throw ConfigError(std::move(diag));
  return c;
}

SpatialGrid ExperimentConfig::grid() const { return {ell, n, omega_a, omega_b}; }

NonlinearitySpec ExperimentConfig::nonlinearity() const { return {kind, lipschitz}; }

Vector ExperimentConfig::initial_state() const {
  if (y0_values) return *y0_values;
  const SpatialGrid g = grid();
  Vector y(n, 0.0);
  for (const auto& [mode, coeff] : y0_modes) {
    const Vector e = eigenmode(g, mode);
    for (std::size_t i = 0; i < n; ++i) y[i] += coeff * e[i];
  }
  return y;
}

Problem ExperimentConfig::problem() const {
  Problem p{grid(), nonlinearity(), initial_state(), TargetBall(r)};
  p.validate();
  return p;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError({"--override '" + assignment + "': expected key=value"});
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError({"--override '" + assignment + "': empty key segment"});
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError({"--override '" + assignment + "': '" + part + "' is not inside an object"});
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open " + path.string()});
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError({"config: " + path.string() + " is not valid JSON"});
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc, path.parent_path());
}

std::string config_hash(const json& doc) {
  const std::string canonical = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void export_curve(const ValueCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << kCurveHeader << '\n';
  for (const auto& p : curve.points) {
    out << format_double(p.parameter) << ',' << format_double(p.value) << ',' << format_double(p.bracket_lo) << ','
        << format_double(p.bracket_hi) << ',' << (p.oracle_value ? format_double(*p.oracle_value) : "") << ','
        << p.iterations << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

ValueCurve parse_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) throw Error(path.string() + ": unexpected curve header");
  ValueCurve curve;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 6) throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 6 columns");
    ValuePoint p;
    p.parameter = std::stod(cells[0]);
    p.value = std::stod(cells[1]);
    p.bracket_lo = std::stod(cells[2]);
    p.bracket_hi = std::stod(cells[3]);
    if (!cells[4].empty()) p.oracle_value = std::stod(cells[4]);
    p.iterations = static_cast<std::size_t>(std::stoull(cells[5]));
    curve.points.push_back(std::move(p));
  }
  return curve;
}

}  // namespace heatctl
