#include "pflow/ekf.hpp"

namespace pflow {

GaussianBelief ekf_predict(const GaussianBelief& belief, const SystemModel& model, int k) {
  const Matrix G = model.transition_jacobian(belief.mean, k);
  GaussianBelief out;
  out.mean = model.transition(belief.mean, k);
  out.covariance = symmetrize(G * belief.covariance * G.transpose() + model.Q);
  return out;
}

GaussianBelief ekf_update(const GaussianBelief& belief, const SystemModel& model, const Vector& z) {
  if (z.size() != model.n_z) throw Error("ekf_update: measurement has wrong dimension");
  const Matrix& P = belief.covariance;
  const Matrix H = model.measurement_jacobian(belief.mean);
  const Matrix PHt = P * H.transpose();
  const Matrix S = symmetrize(H * PHt + model.R);

  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      (ldlt.vectorD().array() <= 0.0).any())
    throw Error("ekf_update: innovation covariance is not invertible");

  // K = P H^T S^{-1}
  const Matrix K = ldlt.solve(PHt.transpose()).transpose();
  const Vector innovation = z - model.measurement(belief.mean);

  GaussianBelief out;
  out.mean = belief.mean + K * innovation;
  const auto n = P.rows();
  out.covariance = symmetrize((Matrix::Identity(n, n) - K * H) * P);
  return out;
}

}  // namespace pflow
