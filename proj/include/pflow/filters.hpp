#pragma once

#include "pflow/ekf.hpp"
#include "pflow/model.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace pflow {

enum class Variant { ekf, edh, ledh, aedh, naedh };

/// "EKF", "EDH", "LEDH", "A-EDH", "NA-EDH".
std::string_view variant_name(Variant v);
/// Inverse of variant_name (case-insensitive); throws on unknown names.
Variant parse_variant(std::string_view name);
inline constexpr Variant kAllVariants[] = {Variant::ekf, Variant::edh, Variant::ledh,
                                           Variant::aedh, Variant::naedh};

enum class LambdaSchedule { uniform, exponential };
enum class CovarianceSource { ekf_prediction, ensemble_sample };

struct FilterConfig {
  Variant variant = Variant::edh;
  int particle_count = 100;
  int lambda_steps = 10;
  LambdaSchedule schedule = LambdaSchedule::uniform;
  // Step growth factor of the exponential schedule.
  double schedule_ratio = 1.2;
  CovarianceSource covariance_source = CovarianceSource::ekf_prediction;
  // Initial belief; zero mean and identity covariance when unset.
  std::optional<Vector> initial_mean;
  std::optional<Matrix> initial_covariance;
  // false places every initial particle on the initial mean.
  bool sample_initial_particles = true;
};

/// One particle per column.
struct ParticleEnsemble {
  Matrix particles;

  Eigen::Index count() const { return particles.cols(); }
  Eigen::Index dim() const { return particles.rows(); }
};

struct FilterState {
  ParticleEnsemble ensemble;
  GaussianBelief ekf_belief;
  int step = 0;
};

struct FilterStep {
  Vector estimate;
  GaussianBelief belief;
};

/// Raised by run_filter when the ensemble or the EKF belief stops being finite.
class FilterFailure : public Error {
 public:
  FilterFailure(int step, const std::string& what);
  int step() const { return step_; }

 private:
  int step_;
};

/// lambda_0 = 0 < lambda_1 < ... < lambda_N = 1.
std::vector<double> lambda_grid(const FilterConfig& config);

/// x_i <- g(x_i, k) + Q^{1/2} e_i with e_i standard normal, drawn particle by particle.
ParticleEnsemble predict_particles(const ParticleEnsemble& ensemble, const SystemModel& model,
                                   int k, Rng& rng);

// Flow updates. P_pred is the predicted covariance; xbar in b is the
// ensemble mean before the flow starts. Nonlinear h is linearized at the
// current ensemble mean (LEDH: at each particle) with the measurement
// shifted by h(x_lin) - H x_lin.

/// Euler-integrated EDH; any n_z.
ParticleEnsemble edh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                            const SystemModel& model, const Vector& z, const FilterConfig& config);
/// Euler-integrated localized EDH; any n_z.
ParticleEnsemble ledh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                             const SystemModel& model, const Vector& z, const FilterConfig& config);
/// One affine map over [0, 1]; n_z must be 1.
ParticleEnsemble aedh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                             const SystemModel& model, const Vector& z, const FilterConfig& config);
/// Exact sub-interval maps on the lambda grid, relinearized per step; n_z must be 1.
ParticleEnsemble naedh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                              const SystemModel& model, const Vector& z, const FilterConfig& config);

/// Dispatches on config.variant (no-op for the EKF variant).
ParticleEnsemble flow_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                             const SystemModel& model, const Vector& z, const FilterConfig& config);

Vector point_estimate(const ParticleEnsemble& ensemble);

/// Unbiased sample covariance plus 1e-9 I.
Matrix sample_covariance(const ParticleEnsemble& ensemble);

/// Runs the EKF alongside the chosen flow over the whole trajectory.
std::vector<FilterStep> run_filter(const SystemModel& model, const Trajectory& trajectory,
                                   const FilterConfig& config, Rng& rng);

}  // namespace pflow
