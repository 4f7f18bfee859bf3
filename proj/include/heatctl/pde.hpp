#pragma once

#include <optional>
#include <span>

#include "heatctl/core.hpp"

namespace heatctl {

/// Eigenpairs of the discrete negative Dirichlet Laplacian, ascending.
struct DirichletSpectrum {
  Vector eigenvalues;
  std::vector<Vector> eigenvectors;  // orthonormal in the discrete L2 inner product, e_1 >= 0
};

/// y -> A y with A = tridiag(-1, 2, -1) / h^2.
Vector apply_laplacian(std::span<const double> v, const SpatialGrid& g);

/// Closed-form eigenpairs of the tridiagonal Laplacian; throws DimensionError if k > n.
DirichletSpectrum dirichlet_eigs(const SpatialGrid& g, std::size_t k);

/// First eigenvalue (2/h^2)(1 - cos(pi h / ell)).
double first_eigenvalue(const SpatialGrid& g);

/// Discrete mode i >= 1, unit discrete L2 norm.
Vector eigenmode(const SpatialGrid& g, std::size_t i);

/**
 * Factorization of the backward-Euler operator I + dt A. The matrix is
 * symmetric positive definite with constant diagonals, so the Thomas sweep
 * needs no pivoting and the factors can be shared by forward and adjoint
 * solves.
 */
class BackwardEulerOperator {
 public:
  BackwardEulerOperator(const SpatialGrid& g, double dt);
  void solve_in_place(std::span<double> rhs) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  double off_;
  Vector inv_pivot_;
  Vector upper_;
};

/**
 * IMEX time stepping of y_t - y_xx + f(y) = chi_omega u:
 *   (I + dt A) y_{k+1} = y_k + dt (chi_omega u_k - f(y_k)).
 * The step count and dt come from the control.
 */
StateTrajectory solve_forward(std::span<const double> y0, const ControlSignal& u, const NonlinearitySpec& f,
                              const SpatialGrid& g);

/// Uncontrolled solve over nt steps of size dt.
StateTrajectory solve_free(std::span<const double> y0, double dt, std::size_t nt, const NonlinearitySpec& f,
                           const SpatialGrid& g);

/**
 * Backward sweep of the exact transpose of the forward step linearized along
 * a stored trajectory:
 *   psi_nt = xi,  p_k = (I + dt A)^{-1} psi_{k+1},  psi_k = (I - dt f'(y_k)) p_k.
 * p_k is the sensitivity of <y_nt, xi> to the control on step k, so for any
 * perturbation (dy0, du)
 *   <dy_nt, xi> = <dy0, psi_0> + sum_k dt <chi_omega du_k, p_k>.
 * With f = 0, p_k and psi_k coincide.
 */
class AdjointTrajectory {
 public:
  AdjointTrajectory(const SpatialGrid& g, double dt, std::size_t nt, Vector costates, Vector control_costates);

  double dt() const { return dt_; }
  std::size_t nt() const { return nt_; }
  std::size_t n() const { return n_; }
  std::span<const double> costate(std::size_t k) const { return {costates_.data() + k * n_, n_}; }
  std::span<const double> control_costate(std::size_t k) const { return {control_.data() + k * n_, n_}; }

 private:
  double dt_;
  std::size_t nt_;
  std::size_t n_;
  Vector costates_;  // k = 0..nt
  Vector control_;   // k = 0..nt-1
};

AdjointTrajectory solve_adjoint(const StateTrajectory& y, std::span<const double> xi, const NonlinearitySpec& f,
                                const SpatialGrid& g);

/// Terminal value of the forward scheme linearized along y, driven by (dy0, du).
Vector solve_linearized_terminal(const StateTrajectory& y, std::span<const double> dy0, const ControlSignal& du,
                                 const NonlinearitySpec& f, const SpatialGrid& g);

/// First time the norm enters B(0, r), interpolating the norm linearly within a step.
std::optional<double> hitting_time(const StateTrajectory& y, const TargetBall& ball);

struct DecayReport {
  double max_excess = 0.0;        // max_k ||y_k|| - e^{-lambda_1 t_k} ||y_0||
  double max_relative_gap = 0.0;  // max_k | ||y_k|| / envelope_k - 1 |
  double max_ratio = 0.0;         // max_k ||y_k|| / envelope_k
  double lambda1 = 0.0;
  bool pass = false;
};

/// Compares the trajectory with the free-decay envelope e^{-lambda_{1,h} t} ||y_0||.
DecayReport decay_envelope_check(const StateTrajectory& y, const SpatialGrid& g, double tol);

struct AprioriReport {
  double sup_norm = 0.0;
  double bound = 0.0;          // (M^2 T / 2 + ||y0||^2)^{1/2} e^T
  double literal_bound = 0.0;  // same with M in place of M^2
  double slack = 0.0;          // bound - sup_norm
  bool pass = false;
  bool literal_pass = false;
};

AprioriReport apriori_bound_check(const StateTrajectory& y, double control_bound, double horizon);

struct ScalingReport {
  double max_gap = 0.0;  // sup_k ||y(t_k; u) - y(t_k; theta u)||
  double bound = 0.0;    // (1 - theta) M sqrt(T) e^{(2L+1)T/2}
  bool pass = false;
};

/// Gap between trajectories driven by u and theta*u from the same initial state.
ScalingReport scaling_bound_check(const StateTrajectory& full, const StateTrajectory& scaled, double theta,
                                  double control_bound, double horizon, double lipschitz, const SpatialGrid& g);

}  // namespace heatctl
