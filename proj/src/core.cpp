#include "heatctl/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace heatctl {

SpatialGrid::SpatialGrid(double ell, std::size_t n, double omega_a, double omega_b)
    : n_(n), ell_(ell), h_(0.0), omega_a_(omega_a), omega_b_(omega_b), mask_(n, 0.0) {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw ArgumentError("grid: domain length must be positive");
  if (n == 0) throw ArgumentError("grid: need at least one interior node");
  if (!(omega_a >= 0.0 && omega_a < omega_b && omega_b <= ell))
    throw ArgumentError("grid: omega must be a nonempty interval inside (0, ell)");
  h_ = ell / static_cast<double>(n + 1);
  std::size_t support = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = node(i);
    if (x > omega_a && x < omega_b) {
      mask_[i] = 1.0;
      ++support;
    }
  }
  if (support == 0) throw ArgumentError("grid: omega contains no grid node; refine the grid");
}

bool SpatialGrid::omega_is_domain() const {
  return std::all_of(mask_.begin(), mask_.end(), [](double m) { return m == 1.0; });
}

void SpatialGrid::apply_mask(std::span<double> v) const {
  for (std::size_t i = 0; i < n_; ++i) v[i] *= mask_[i];
}

void require_size(std::span<const double> v, const SpatialGrid& g, const char* what) {
  if (v.size() != g.n()) {
    std::ostringstream os;
    os << what << ": expected " << g.n() << " entries, got " << v.size();
    throw DimensionError(os.str());
  }
}

double inner(std::span<const double> a, std::span<const double> b, const SpatialGrid& g) {
  require_size(a, g, "inner");
  require_size(b, g, "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return g.h() * s;
}

double l2_norm(std::span<const double> v, const SpatialGrid& g) {
  require_size(v, g, "l2_norm");
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(g.h() * s);
}

std::string to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::zero: return "zero";
    case NonlinearityKind::scaled_tanh: return "scaled_tanh";
    case NonlinearityKind::bounded_odd_rational: return "bounded_odd_rational";
  }
  return "unknown";
}

NonlinearityKind nonlinearity_kind_from_string(const std::string& name) {
  if (name == "zero") return NonlinearityKind::zero;
  if (name == "scaled_tanh" || name == "tanh") return NonlinearityKind::scaled_tanh;
  if (name == "bounded_odd_rational" || name == "rational") return NonlinearityKind::bounded_odd_rational;
  throw ArgumentError("unknown nonlinearity kind '" + name + "'");
}

NonlinearitySpec::NonlinearitySpec(NonlinearityKind kind, double lipschitz) : kind_(kind), lipschitz_(lipschitz) {
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz))
    throw ArgumentError("nonlinearity: L must be finite and nonnegative");
  if (kind == NonlinearityKind::zero) lipschitz_ = 0.0;
}

double NonlinearitySpec::value(double y) const {
  switch (kind_) {
    case NonlinearityKind::zero: return 0.0;
    case NonlinearityKind::scaled_tanh: return lipschitz_ * std::tanh(y);
    case NonlinearityKind::bounded_odd_rational: return lipschitz_ * y / (1.0 + y * y);
  }
  return 0.0;
}

double NonlinearitySpec::derivative(double y) const {
  switch (kind_) {
    case NonlinearityKind::zero: return 0.0;
    case NonlinearityKind::scaled_tanh: {
      const double t = std::tanh(y);
      return lipschitz_ * (1.0 - t * t);
    }
    case NonlinearityKind::bounded_odd_rational: {
      const double q = 1.0 + y * y;
      return lipschitz_ * (1.0 - y * y) / (q * q);
    }
  }
  return 0.0;
}

H1Report validate_h1(const std::function<double(double)>& f, const std::function<double(double)>& fprime,
                     double lipschitz, std::span<const double> samples) {
  if (samples.empty()) throw ArgumentError("validate_h1: empty sample set");
  H1Report rep;
  rep.min_sign_product = std::numeric_limits<double>::infinity();
  for (double y : samples) {
    rep.max_abs_derivative = std::max(rep.max_abs_derivative, std::abs(fprime(y)));
    rep.min_sign_product = std::min(rep.min_sign_product, f(y) * y);
  }
  rep.max_abs_f_at_zero = std::abs(f(0.0));
  // Relative slack for rounding in f' near its maximum.
  rep.derivative_ok = rep.max_abs_derivative <= lipschitz * (1.0 + 1e-12);
  rep.sign_ok = rep.min_sign_product >= 0.0;
  rep.pass = rep.derivative_ok && rep.sign_ok && rep.max_abs_f_at_zero == 0.0;
  return rep;
}

H1Report validate_h1(const NonlinearitySpec& f, std::span<const double> samples) {
  return validate_h1([&](double y) { return f.value(y); }, [&](double y) { return f.derivative(y); },
                     f.lipschitz(), samples);
}

Vector linspace(double lo, double hi, std::size_t n) {
  Vector out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

TargetBall::TargetBall(double r) : r_(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ArgumentError("target ball: radius must be positive");
}

H2Result validate_h2(std::span<const double> y0, const TargetBall& ball, const SpatialGrid& g) {
  H2Result res;
  res.norm = l2_norm(y0, g);
  res.radius = ball.r();
  res.ok = res.norm > ball.r();
  return res;
}

namespace {
std::string h2_message(double norm, double radius) {
  std::ostringstream os;
  os.precision(17);
  os << "(H2) violated: ||y0|| = " << norm << " does not exceed r = " << radius;
  return os.str();
}
}  // namespace

H2Violation::H2Violation(double norm, double radius)
    : Error(h2_message(norm, radius)), norm_(norm), radius_(radius) {}

ControlSignal::ControlSignal(const SpatialGrid& g, double dt, std::size_t nt, Vector values)
    : dt_(dt), nt_(nt), n_(g.n()), values_(std::move(values)) {
  if (!(dt > 0.0)) throw ArgumentError("control: dt must be positive");
  if (values_.size() != nt * n_) throw DimensionError("control: expected nt * n values");
  for (std::size_t k = 0; k < nt_; ++k) g.apply_mask({values_.data() + k * n_, n_});
}

ControlSignal ControlSignal::zero(const SpatialGrid& g, double dt, std::size_t nt) {
  return {g, dt, nt, Vector(nt * g.n(), 0.0)};
}

Vector ControlSignal::pointwise_norms(const SpatialGrid& g) const {
  Vector out(nt_);
  for (std::size_t k = 0; k < nt_; ++k) out[k] = pointwise_norm(k, g);
  return out;
}

double ControlSignal::max_pointwise_norm(const SpatialGrid& g) const {
  double m = 0.0;
  for (std::size_t k = 0; k < nt_; ++k) m = std::max(m, pointwise_norm(k, g));
  return m;
}

ControlSignal ControlSignal::with_dt(double dt) const {
  if (!(dt > 0.0)) throw ArgumentError("control: dt must be positive");
  ControlSignal out = *this;
  out.dt_ = dt;
  return out;
}

StateTrajectory::StateTrajectory(const SpatialGrid& g, double dt, std::size_t nt, Vector states)
    : dt_(dt), nt_(nt), n_(g.n()), states_(std::move(states)), norms_(nt + 1) {
  if (states_.size() != (nt + 1) * n_) throw DimensionError("trajectory: expected (nt + 1) * n values");
  for (std::size_t k = 0; k <= nt_; ++k) norms_[k] = l2_norm(state(k), g);
}

}  // namespace heatctl
