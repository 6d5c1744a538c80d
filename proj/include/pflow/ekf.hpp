#pragma once

#include "pflow/model.hpp"

namespace pflow {

struct GaussianBelief {
  Vector mean;
  Matrix covariance;
};

/// x = g(x), P = G P G^T + Q, G linearized at the prior mean.
GaussianBelief ekf_predict(const GaussianBelief& belief, const SystemModel& model, int k);

/// Standard EKF measurement update with H linearized at the predicted mean.
/// Covariance update is the plain (I - KH) P form, then symmetrized.
GaussianBelief ekf_update(const GaussianBelief& belief, const SystemModel& model, const Vector& z);

}  // namespace pflow
