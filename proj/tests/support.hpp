#pragma once

#include "pflow/flow.hpp"
#include "pflow/model.hpp"

#include <doctest.h>

namespace pflow::test {

inline FlowCoefficients scalar(double P, double H, double R, double z, double xbar) {
  return build_coefficients(Matrix::Constant(1, 1, P), RowVector::Constant(1, H), R, z,
                            Vector::Constant(1, xbar));
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double s = b.norm();
  return s > 0.0 ? (a - b).norm() / s : (a - b).norm();
}

// x_k = F x_{k-1} + w, z = H x + v.
inline SystemModel linear_model(const Matrix& F, const Matrix& H, const Matrix& Q,
                                const Matrix& R) {
  SystemModel m;
  m.name = "linear";
  m.n_x = F.rows();
  m.n_z = H.rows();
  m.transition = [F](const Vector& x, int) -> Vector { return F * x; };
  m.transition_jacobian = [F](const Vector&, int) -> Matrix { return F; };
  m.measurement = [H](const Vector& x) -> Vector { return H * x; };
  m.measurement_jacobian = [H](const Vector&) -> Matrix { return H; };
  m.set_noise(Q, R);
  return m;
}

}  // namespace pflow::test
