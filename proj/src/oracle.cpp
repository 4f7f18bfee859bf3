#include "heatctl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "heatctl/pde.hpp"

namespace heatctl {

ScalarInstance::ScalarInstance(double a0_, double r_, double lam_) : a0(a0_), r(r_), lam(lam_) {
  if (!(r > 0.0) || !(a0 > r)) throw ArgumentError("scalar instance: need a0 > r > 0");
  if (!(lam > 0.0)) throw ArgumentError("scalar instance: need lam > 0");
}

double ScalarInstance::gamma() const { return std::log(a0 / r) / lam; }

double scalar_tau(const ScalarInstance& inst, double bound) {
  if (!(bound >= 0.0)) throw ArgumentError("scalar_tau: M must be >= 0");
  if (std::isinf(bound)) return 0.0;
  const double s = bound / inst.lam;
  return std::log((inst.a0 + s) / (inst.r + s)) / inst.lam;
}

double scalar_alpha(const ScalarInstance& inst, double horizon) {
  const double g = inst.gamma();
  if (!(horizon > 0.0) || horizon > g * (1.0 + 1e-14)) {
    std::ostringstream os;
    os.precision(17);
    os << "scalar_alpha: T = " << horizon << " outside (0, " << g << "]";
    throw ArgumentError(os.str());
  }
  const double decay = std::exp(-inst.lam * horizon);
  return std::max(0.0, inst.lam * (inst.a0 * decay - inst.r) / -std::expm1(-inst.lam * horizon));
}

namespace {

void validate_amp_grid(const Vector& amps) {
  if (amps.empty() || amps.size() > 21) throw ArgumentError("bruteforce: amplitude grid needs 1..21 levels");
  Vector sorted = amps;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ArgumentError("bruteforce: amplitude grid has duplicates");
  if (!std::binary_search(sorted.begin(), sorted.end(), 0.0))
    throw ArgumentError("bruteforce: amplitude grid must contain 0");
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (std::abs(sorted[i] + sorted[sorted.size() - 1 - i]) > 1e-12 * (1.0 + std::abs(sorted[i])))
      throw ArgumentError("bruteforce: amplitude grid must be symmetric about 0");
}

struct Reduced {
  std::size_t k;
  std::size_t n;
  double dt;
  Vector lam;
  std::vector<Vector> modes;
  Vector gram;  // <chi e_i, e_j>
  const NonlinearitySpec* f;
  const SpatialGrid* g;

  // Advances a through `count` steps under the modal forcing `force`.
  void advance(Vector& a, std::span<const double> force, std::size_t count, Vector& field) const {
    const bool nonlinear = !f->is_linear();
    for (std::size_t s = 0; s < count; ++s) {
      Vector proj(k, 0.0);
      if (nonlinear) {
        std::fill(field.begin(), field.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < n; ++j) field[j] += a[i] * modes[i][j];
        for (std::size_t j = 0; j < n; ++j) field[j] = f->value(field[j]);
        for (std::size_t i = 0; i < k; ++i) proj[i] = inner(field, modes[i], *g);
      }
      for (std::size_t i = 0; i < k; ++i) a[i] = (a[i] + dt * (force[i] - proj[i])) / (1.0 + dt * lam[i]);
    }
  }
};

struct Choice {
  Vector coeffs;
  Vector force;  // modal forcing G c
  double norm;   // ||sum_j c_j chi e_j||
};

struct Accumulator {
  Vector best;  // per level
  std::size_t candidates = 0;
};

std::size_t level_index(const Vector& levels, double norm) {
  const double tol = 1e-12 * (1.0 + norm);
  auto it = std::lower_bound(levels.begin(), levels.end(), norm - tol);
  return static_cast<std::size_t>(it - levels.begin());
}

void enumerate(const Reduced& red, const std::vector<Choice>& choices, const Vector& levels,
               const std::vector<std::size_t>& boundaries, std::size_t interval, Vector a, double level_norm,
               Accumulator& acc, Vector& field) {
  const std::size_t m = boundaries.size() - 1;
  for (const Choice& c : choices) {
    const double norm = std::max(level_norm, c.norm);
    const std::size_t li = level_index(levels, norm);
    if (li >= levels.size()) continue;
    Vector next = a;
    red.advance(next, c.force, boundaries[interval + 1] - boundaries[interval], field);
    if (interval + 1 < m) {
      enumerate(red, choices, levels, boundaries, interval + 1, std::move(next), norm, acc, field);
    } else {
      double sq = 0.0;
      for (double x : next) sq += x * x;
      acc.best[li] = std::min(acc.best[li], std::sqrt(sq));
      ++acc.candidates;
    }
  }
}

}  // namespace

BruteForceBracket galerkin_bruteforce_alpha(std::span<const double> y0, double horizon, const BruteForceOptions& opts,
                                            const NonlinearitySpec& f, const SpatialGrid& g, const TargetBall& ball) {
  require_size(y0, g, "bruteforce: y0");
  if (!(horizon > 0.0)) throw ArgumentError("bruteforce: T must be positive");
  if (opts.k_modes == 0 || opts.k_modes > 3) throw ArgumentError("bruteforce: k_modes must be in 1..3");
  if (opts.m_intervals == 0 || opts.m_intervals > 3) throw ArgumentError("bruteforce: m_intervals must be in 1..3");
  if (opts.steps < opts.m_intervals) throw ArgumentError("bruteforce: fewer steps than intervals");
  validate_amp_grid(opts.amp_grid);

  const std::size_t k = opts.k_modes;
  const std::size_t m = opts.m_intervals;
  const std::size_t levels_per_interval = static_cast<std::size_t>(
      std::llround(std::pow(static_cast<double>(opts.amp_grid.size()), static_cast<double>(k))));
  const double total = std::pow(static_cast<double>(levels_per_interval), static_cast<double>(m));
  if (total > static_cast<double>(opts.budget)) {
    std::ostringstream os;
    os << "bruteforce: " << total << " candidates exceed the budget of " << opts.budget;
    throw EnumerationTooLarge(os.str());
  }

  const DirichletSpectrum spec = dirichlet_eigs(g, k);
  Reduced red{k, g.n(), horizon / static_cast<double>(opts.steps), spec.eigenvalues, spec.eigenvectors,
              Vector(k * k), &f, &g};
  Vector masked(g.n());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < g.n(); ++j) masked[j] = g.mask()[j] * red.modes[i][j];
    for (std::size_t l = 0; l < k; ++l) red.gram[i * k + l] = inner(masked, red.modes[l], g);
  }

  Vector a0(k);
  for (std::size_t i = 0; i < k; ++i) a0[i] = inner(y0, red.modes[i], g);

  std::vector<Choice> choices;
  choices.reserve(levels_per_interval);
  for (std::size_t idx = 0; idx < levels_per_interval; ++idx) {
    Choice c{Vector(k), Vector(k, 0.0), 0.0};
    std::size_t rem = idx;
    for (std::size_t i = 0; i < k; ++i) {
      c.coeffs[i] = opts.amp_grid[rem % opts.amp_grid.size()];
      rem /= opts.amp_grid.size();
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l) {
        c.force[i] += red.gram[i * k + l] * c.coeffs[l];
        quad += c.coeffs[i] * red.gram[i * k + l] * c.coeffs[l];
      }
    c.norm = std::sqrt(std::max(quad, 0.0));
    choices.push_back(std::move(c));
  }

  BruteForceBracket out;
  for (double v : opts.amp_grid)
    if (v >= 0.0) out.levels.push_back(v);
  std::sort(out.levels.begin(), out.levels.end());

  std::vector<std::size_t> boundaries(m + 1);
  for (std::size_t j = 0; j <= m; ++j) boundaries[j] = j * opts.steps / m;

  // Split the first interval's choices across workers; reduce by min.
  std::size_t workers = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, choices.size());
  std::vector<std::future<Accumulator>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      Accumulator acc{Vector(out.levels.size(), std::numeric_limits<double>::infinity()), 0};
      Vector field(g.n());
      std::vector<Choice> mine;
      for (std::size_t i = w; i < choices.size(); i += workers) mine.push_back(choices[i]);
      const std::size_t first_len = boundaries[1] - boundaries[0];
      for (const Choice& c : mine) {
        const std::size_t li = level_index(out.levels, c.norm);
        if (li >= out.levels.size()) continue;
        Vector a = a0;
        red.advance(a, c.force, first_len, field);
        if (m == 1) {
          double sq = 0.0;
          for (double x : a) sq += x * x;
          acc.best[li] = std::min(acc.best[li], std::sqrt(sq));
          ++acc.candidates;
        } else {
          enumerate(red, choices, out.levels, boundaries, 1, std::move(a), c.norm, acc, field);
        }
      }
      return acc;
    }));
  }
  out.best_terminal.assign(out.levels.size(), std::numeric_limits<double>::infinity());
  for (auto& j : jobs) {
    const Accumulator acc = j.get();
    out.candidates += acc.candidates;
    for (std::size_t i = 0; i < acc.best.size(); ++i) out.best_terminal[i] = std::min(out.best_terminal[i], acc.best[i]);
  }
  // Candidate sets are nested in the level.
  for (std::size_t i = 1; i < out.best_terminal.size(); ++i)
    out.best_terminal[i] = std::min(out.best_terminal[i], out.best_terminal[i - 1]);

  for (std::size_t i = 0; i < out.levels.size(); ++i) {
    if (ball.contains(out.best_terminal[i])) {
      out.upper = out.levels[i];
      if (i > 0) out.lower = out.levels[i - 1];
      return out;
    }
  }
  out.lower = out.levels.back();
  return out;
}

}  // namespace heatctl
