#pragma once

#include "pflow/types.hpp"

#include <functional>
#include <vector>

namespace pflow {

/// Additive-noise discrete-time system
///   x_k = g(x_{k-1}, k) + w_k,   w_k ~ N(0, Q)
///   z_k = h(x_k) + v_k,          v_k ~ N(0, R)
/// Immutable once built; safe to share across threads.
struct SystemModel {
  using Transition = std::function<Vector(const Vector&, int)>;
  using Measurement = std::function<Vector(const Vector&)>;
  using TransitionJacobian = std::function<Matrix(const Vector&, int)>;
  using MeasurementJacobian = std::function<Matrix(const Vector&)>;

  std::string name;
  Eigen::Index n_x = 0;
  Eigen::Index n_z = 0;
  Transition transition;
  Measurement measurement;
  TransitionJacobian transition_jacobian;
  MeasurementJacobian measurement_jacobian;
  Matrix Q;
  Matrix R;
  // Cholesky factors, filled by set_noise().
  Matrix Q_sqrt;
  Matrix R_sqrt;

  /// Installs the noise covariances and their factors. Throws if either is
  /// neither SPD nor exactly zero.
  void set_noise(Matrix q, Matrix r);
};

struct Trajectory {
  std::vector<Vector> states;        // x_1 .. x_N
  std::vector<Vector> measurements;  // z_1 .. z_N

  std::size_t steps() const { return states.size(); }
};

/// Univariate nonstationary growth model:
///   x_k = x/2 + 25x/(1+x^2) + 8cos(1.2k),  z = x^2/20,  Q = 10,  R = 0.1.
SystemModel ungm_model();

/// Random stable linear dynamics F = T U T^{-1} (U = diag(-u), u ~ U(0,1)),
/// Q = T_Q T_Q^T, quadratic measurement z = x^T x with R = 5.
/// T is redrawn until cond(T) < 1e6; gives up after 100 draws.
SystemModel random_coupled_model(int dim, Rng& rng);

/// Draws a ground-truth trajectory starting from x0 (not stored).
Trajectory simulate(const SystemModel& model, const Vector& x0, int steps, Rng& rng);

/// Largest deviation between the analytic Jacobians and central
/// differences (step 1e-6 (1 + |x_i|)), relative to max(1, |J|_max).
double jacobian_check(const SystemModel& model, const Vector& x, int k);

}  // namespace pflow
