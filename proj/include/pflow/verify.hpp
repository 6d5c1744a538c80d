#pragma once

#include "pflow/oracle.hpp"

#include <string>
#include <vector>

namespace pflow {

// Random-instance checks of the closed-form flow against the oracles.
// Each check reports the largest deviation it saw; callers compare it
// against their own tolerance.

struct FlowInstance {
  Matrix P;
  Matrix H;  // n_z x n_x
  Matrix R;
  Vector z;
  Vector xbar;
};

/// Random SPD matrix with eigenvalues roughly in [0.5, 3].
Matrix random_spd(int n, Rng& rng);

/// Random SPD P, Gaussian H, SPD R, z and xbar. For n_z = 1 the row H is
/// rescaled so that HPH^T / R is log-uniform in [1e-2, 1e2] and
/// R is log-uniform in [0.1, 10].
FlowInstance random_flow_instance(int n_x, int n_z, Rng& rng);

/// Scalar-measurement instance as a coefficient bundle.
FlowCoefficients scalar_coefficients(const FlowInstance& inst);

struct CheckResult {
  std::string name;
  int instances = 0;
  double max_error = 0.0;
  double seconds = 0.0;
};

/// ||[A(l), A(t)]||_F / (||A(l)||_F ||A(t)||_F) over a 0.1 grid of (l, t);
/// n_x <= 20, n_z <= 5.
CheckResult check_commutativity(int instances, Rng& rng);

/// Relative Frobenius error of Phi(l, l0) against expm of the quadrature
/// of A over [l0, l]; n_x <= 20.
CheckResult check_transition(int instances, Rng& rng);

/// Relative error of every Psi_i against quadrature on random sub-intervals.
CheckResult check_psi(int instances, Rng& rng);

/// Relative error of the analytic map against RK4 with `rk4_steps` steps;
/// n_x cycles through {1, 2, 5, 10, 50}.
CheckResult check_rk4(int instances, Rng& rng, int rk4_steps = 10000);

/// Relative error of the [0, 1] map against the Kalman posterior, the
/// larger of the mean and the covariance error.
CheckResult check_kalman(int instances, Rng& rng);

/// Largest per-particle deviation, relative to max(1, |x|), between
/// NA-EDH with 2, 10 and 100 steps and A-EDH on a linear measurement.
CheckResult check_semigroup(int instances, Rng& rng);

/// Euler errors at 10, 100 and 1000 steps; max_error is the largest of
/// e(100)/e(10) and e(1000)/e(100), so strict decrease means < 1.
CheckResult check_euler(int instances, Rng& rng);

}  // namespace pflow
