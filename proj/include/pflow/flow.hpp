#pragma once

#include "pflow/types.hpp"

#include <array>

namespace pflow {

// Exact Daum-Huang flow dx/dlambda = A(lambda) x + b(lambda) and its
// closed-form solution for a scalar measurement.
//
// With P the prior covariance, H the 1 x n measurement row, r = R, z the
// (linearized) measurement and xbar the prior mean:
//   M = P H^T H,  w = P H^T z / r,  p = H P H^T,  k(lambda) = lambda p + r
//   Phi(l, l0) = I + (M / p) (sqrt(k(l0) / k(l)) - 1)
//   x(l) = Phi(l, l0) x(l0) + sum_i Psi_i(l, l0)
// Every Psi_i is a scalar times w (i = 0, 2, 4) or times M xbar (i = 1, 3).

/// Measurement rows with max |H_j| below this carry no information; the
/// flow collapses to the identity map.
inline constexpr double kDegenerateH = 1e-12;

struct FlowCoefficients {
  Matrix P;
  RowVector H;
  double r = 1.0;
  double z = 0.0;
  Vector xbar;

  Vector PHt;  // P H^T
  Matrix M;    // P H^T H, rank one
  Vector w;    // P H^T z / r
  double p = 0.0;
  bool degenerate = false;

  Eigen::Index dim() const { return P.rows(); }
};

/// Builds the coefficient bundle. Rejects non-SPD P, R <= 0 and size
/// mismatches; a flat H is flagged as degenerate, not rejected.
FlowCoefficients build_coefficients(const Matrix& P, const RowVector& H, double R, double z,
                                    const Vector& xbar);

/// Same as build_coefficients without the O(n^3) SPD check on P. For hot
/// loops where P was validated once up front.
FlowCoefficients build_coefficients_unchecked(const Matrix& P, const RowVector& H, double R,
                                              double z, const Vector& xbar);

/// k(lambda) = lambda p + r.
double k_eval(const FlowCoefficients& c, double lambda);

/// A(lambda) = -1/2 P H^T (lambda H P H^T + R)^{-1} H for any n_z.
Matrix drift_matrix_A(const Matrix& P, const Matrix& H, const Matrix& R, double lambda);

/// b(lambda) = (I + 2 lambda A)((I + lambda A) P H^T R^{-1} z + A xbar).
Vector drift_vector_b(const Matrix& P, const Matrix& H, const Matrix& R, const Vector& z,
                      const Vector& xbar, double lambda);

struct Drift {
  Matrix A;
  Vector b;
};

/// A(lambda) and b(lambda) together; A is formed once.
Drift drift_coefficients(const Matrix& P, const Matrix& H, const Matrix& R, const Vector& z,
                         const Vector& xbar, double lambda);

/// beta(l, l0) = -log(k(l) / k(l0)) / (2p), so that Phi = exp(beta M).
double beta_factor(const FlowCoefficients& c, double lambda, double lambda0);

/// Dense Phi(lambda, lambda0).
Matrix transition_matrix(const FlowCoefficients& c, double lambda, double lambda0);

/// Psi_index(lambda, lambda0) = int_{lambda0}^{lambda} Phi(lambda, tau) b_index(tau) dtau.
Vector psi_term(const FlowCoefficients& c, int index, double lambda, double lambda0);

/// Sum of the five Psi terms, evaluated as one collected closed form that
/// stays accurate for H P H^T >> R.
Vector inhomogeneous_sum(const FlowCoefficients& c, double lambda, double lambda0);

/// x -> Phi x + d with Phi kept in rank-one form: Phi = I + direction * H.
struct AffineFlowMap {
  Vector direction;
  RowVector H;
  Vector offset;

  Matrix transition() const;
  Vector apply(const Vector& x) const;
  /// Applies the map to every column of `particles`.
  void apply_in_place(Matrix& particles) const;
};

AffineFlowMap analytic_flow_map(const FlowCoefficients& c, double lambda, double lambda0);

Vector apply_flow(const FlowCoefficients& c, const Vector& x, double lambda, double lambda0);

namespace detail {

/// Scalars c_i with Psi_i = c_i w (i even) or c_i M xbar (i odd), plus
/// phi = (sqrt(k(l0)/k(l)) - 1) / p. Exposed for testing the two
/// evaluation branches.
struct FlowScalars {
  std::array<double, 5> psi{};
  double phi = 0.0;
};

/// Below this value of eps = p (l - l0) / k(l0) the scalars come from a
/// power series in eps instead of the ratio forms.
inline constexpr double kSeriesSwitch = 0.05;

FlowScalars flow_scalars_closed(double p, double r, double lambda, double lambda0);
FlowScalars flow_scalars_series(double p, double r, double lambda, double lambda0);
FlowScalars flow_scalars(double p, double r, double lambda, double lambda0);

}  // namespace detail

}  // namespace pflow
