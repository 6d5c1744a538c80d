#pragma once

#include "pflow/ekf.hpp"
#include "pflow/flow.hpp"

#include <functional>

namespace pflow {

// Brute-force references for the closed-form flow. Nothing here calls the
// closed-form Phi/Psi code in flow.cpp.

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_depth = 50;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Scaling and squaring with a truncated Taylor series.
Matrix matrix_exponential(const Matrix& m);

/// Vector-valued adaptive Simpson quadrature of f over [a, b].
Vector adaptive_simpson(const std::function<Vector(double)>& f, double a, double b,
                        const QuadratureSpec& spec = {});

/// dx/dlambda as a function of (lambda, x).
using DriftFn = std::function<Vector(double, const Vector&)>;

/// A(lambda) x + b(lambda) evaluated in operator form (no n x n matrices),
/// for any number of measurement rows.
DriftFn frozen_drift(const Matrix& P, const Matrix& H, const Matrix& R, const Vector& z,
                     const Vector& xbar);
DriftFn frozen_drift(const FlowCoefficients& c);

enum class Integrator { euler, rk4 };

/// Fixed-step integration of dx/dlambda = drift(lambda, x).
Vector integrate_flow_numeric(const DriftFn& drift, const Vector& x0, double lambda0,
                              double lambda1, int steps, Integrator method);

/// Closed-form integral of A over [lambda0, lambda]:
///   -1/2 (M / p) log(k(lambda) / k(lambda0)).
Matrix drift_integral(const FlowCoefficients& c, double lambda, double lambda0);

/// Quadrature of tau -> Phi(lambda, tau) b_index(tau), with b_index from the
/// five-term expansion of b built on drift_matrix_A.
Vector quadrature_inhomogeneous(const FlowCoefficients& c, int index, double lambda,
                                double lambda0, const QuadratureSpec& spec = {});

/// Exact linear-Gaussian posterior for z = H x + v, v ~ N(0, R).
GaussianBelief kalman_posterior(const Matrix& P, const Matrix& H, const Matrix& R,
                                const Vector& z, const Vector& xbar);

/// || A(lambda) A(tau) - A(tau) A(lambda) ||_F.
double commutator_norm(const Matrix& P, const Matrix& H, const Matrix& R, double lambda,
                       double tau);

}  // namespace pflow
