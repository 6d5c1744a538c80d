#include "pflow/filters.hpp"

#include "pflow/flow.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace pflow {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::ekf: return "EKF";
    case Variant::edh: return "EDH";
    case Variant::ledh: return "LEDH";
    case Variant::aedh: return "A-EDH";
    case Variant::naedh: return "NA-EDH";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  for (Variant v : kAllVariants)
    if (variant_name(v) == upper) return v;
  throw Error("unknown filter '" + std::string(name) + "'");
}

FilterFailure::FilterFailure(int step, const std::string& what)
    : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

std::vector<double> lambda_grid(const FilterConfig& config) {
  const int n = config.lambda_steps;
  if (n < 1) throw Error("lambda_steps must be >= 1");
  std::vector<double> grid(n + 1);
  grid[0] = 0.0;
  if (config.schedule == LambdaSchedule::uniform || config.schedule_ratio == 1.0) {
    for (int j = 1; j <= n; ++j) grid[j] = static_cast<double>(j) / n;
  } else {
    const double q = config.schedule_ratio;
    const double first = (1.0 - q) / (1.0 - std::pow(q, n));
    double step = first;
    for (int j = 1; j <= n; ++j, step *= q) grid[j] = grid[j - 1] + step;
  }
  grid[n] = 1.0;
  return grid;
}

namespace {

bool flat(const Matrix& H) { return H.size() == 0 || H.cwiseAbs().maxCoeff() < kDegenerateH; }

void require_spd(const Matrix& P) {
  if (!is_spd(P)) throw Error("flow update: predicted covariance is not SPD");
}

void require_scalar(const SystemModel& model) {
  if (model.n_z != 1) throw Error("analytic flow requires a scalar measurement (n_z = 1)");
}

Vector mean_of(const Matrix& particles) { return particles.rowwise().mean(); }

// z - h(x_lin) + H x_lin: the measurement seen by the flow once h is replaced
// by its tangent at x_lin. Equals z for linear h.
Vector linearized_measurement(const SystemModel& model, const Vector& z, const Matrix& H,
                              const Vector& x_lin) {
  return z - model.measurement(x_lin) + H * x_lin;
}

}  // namespace

ParticleEnsemble predict_particles(const ParticleEnsemble& ensemble, const SystemModel& model,
                                   int k, Rng& rng) {
  const auto n = ensemble.dim();
  const auto count = ensemble.count();
  Matrix noise(n, count);
  for (Eigen::Index i = 0; i < count; ++i) noise.col(i) = standard_normal(n, rng);

  ParticleEnsemble out;
  out.particles = model.Q_sqrt * noise;
  for (Eigen::Index i = 0; i < count; ++i)
    out.particles.col(i) += model.transition(ensemble.particles.col(i), k);
  return out;
}

ParticleEnsemble edh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                            const SystemModel& model, const Vector& z, const FilterConfig& config) {
  require_spd(P_pred);
  const auto grid = lambda_grid(config);
  Matrix x = ensemble.particles;
  const Vector prior_mean = mean_of(x);

  for (std::size_t j = 1; j < grid.size(); ++j) {
    const double lambda = grid[j];
    const double dl = grid[j] - grid[j - 1];
    const Vector x_lin = mean_of(x);
    const Matrix H = model.measurement_jacobian(x_lin);
    if (flat(H)) continue;
    const Vector z_lin = linearized_measurement(model, z, H, x_lin);
    const Drift d = drift_coefficients(P_pred, H, model.R, z_lin, prior_mean, lambda);
    x += dl * (d.A * x);
    x.colwise() += dl * d.b;
  }
  return {std::move(x)};
}

ParticleEnsemble ledh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                             const SystemModel& model, const Vector& z, const FilterConfig& config) {
  require_spd(P_pred);
  const auto grid = lambda_grid(config);
  Matrix x = ensemble.particles;
  const Vector prior_mean = mean_of(x);

  for (std::size_t j = 1; j < grid.size(); ++j) {
    const double lambda = grid[j];
    const double dl = grid[j] - grid[j - 1];
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const Vector xi = x.col(i);
      const Matrix H = model.measurement_jacobian(xi);
      if (flat(H)) continue;
      const Vector z_lin = linearized_measurement(model, z, H, xi);
      const Drift d = drift_coefficients(P_pred, H, model.R, z_lin, prior_mean, lambda);
      x.col(i) = xi + dl * (d.A * xi + d.b);
    }
  }
  return {std::move(x)};
}

ParticleEnsemble aedh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                             const SystemModel& model, const Vector& z, const FilterConfig&) {
  require_scalar(model);
  require_spd(P_pred);
  Matrix x = ensemble.particles;
  const Vector prior_mean = mean_of(x);
  const Matrix H = model.measurement_jacobian(prior_mean);
  if (flat(H)) return {std::move(x)};

  const Vector z_lin = linearized_measurement(model, z, H, prior_mean);
  const auto coeffs =
      build_coefficients_unchecked(P_pred, H.row(0), model.R(0, 0), z_lin[0], prior_mean);
  analytic_flow_map(coeffs, 1.0, 0.0).apply_in_place(x);
  return {std::move(x)};
}

ParticleEnsemble naedh_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                              const SystemModel& model, const Vector& z, const FilterConfig& config) {
  require_scalar(model);
  require_spd(P_pred);
  const auto grid = lambda_grid(config);
  Matrix x = ensemble.particles;
  const Vector prior_mean = mean_of(x);

  for (std::size_t j = 1; j < grid.size(); ++j) {
    const Vector x_lin = mean_of(x);
    const Matrix H = model.measurement_jacobian(x_lin);
    if (flat(H)) continue;
    const Vector z_lin = linearized_measurement(model, z, H, x_lin);
    const auto coeffs =
        build_coefficients_unchecked(P_pred, H.row(0), model.R(0, 0), z_lin[0], prior_mean);
    analytic_flow_map(coeffs, grid[j], grid[j - 1]).apply_in_place(x);
  }
  return {std::move(x)};
}

ParticleEnsemble flow_update(const ParticleEnsemble& ensemble, const Matrix& P_pred,
                             const SystemModel& model, const Vector& z, const FilterConfig& config) {
  switch (config.variant) {
    case Variant::ekf: return ensemble;
    case Variant::edh: return edh_update(ensemble, P_pred, model, z, config);
    case Variant::ledh: return ledh_update(ensemble, P_pred, model, z, config);
    case Variant::aedh: return aedh_update(ensemble, P_pred, model, z, config);
    case Variant::naedh: return naedh_update(ensemble, P_pred, model, z, config);
  }
  throw Error("flow_update: unknown variant");
}

Vector point_estimate(const ParticleEnsemble& ensemble) {
  if (ensemble.count() < 1) throw Error("point_estimate: empty ensemble");
  return mean_of(ensemble.particles);
}

Matrix sample_covariance(const ParticleEnsemble& ensemble) {
  const auto n = ensemble.dim();
  const auto count = ensemble.count();
  if (count < 2) throw Error("sample_covariance: need at least two particles");
  const Matrix centered = ensemble.particles.colwise() - mean_of(ensemble.particles);
  return symmetrize(centered * centered.transpose() / static_cast<double>(count - 1)) +
         1e-9 * Matrix::Identity(n, n);
}

std::vector<FilterStep> run_filter(const SystemModel& model, const Trajectory& trajectory,
                                   const FilterConfig& config, Rng& rng) {
  const auto n = model.n_x;
  if (config.particle_count < 1) throw Error("run_filter: particle_count must be >= 1");
  if (config.lambda_steps < 1) throw Error("run_filter: lambda_steps must be >= 1");

  GaussianBelief belief{config.initial_mean.value_or(Vector::Zero(n)),
                        config.initial_covariance.value_or(Matrix::Identity(n, n))};
  if (belief.mean.size() != n || belief.covariance.rows() != n)
    throw Error("run_filter: initial belief has wrong dimension");

  const bool particles = config.variant != Variant::ekf;
  ParticleEnsemble ensemble;
  if (particles) {
    ensemble.particles = belief.mean.replicate(1, config.particle_count);
    if (config.sample_initial_particles) {
      const Matrix L = noise_sqrt(belief.covariance);
      for (int i = 0; i < config.particle_count; ++i)
        ensemble.particles.col(i) += L * standard_normal(n, rng);
    }
  }

  std::vector<FilterStep> out;
  out.reserve(trajectory.steps());
  for (std::size_t idx = 0; idx < trajectory.steps(); ++idx) {
    const int k = static_cast<int>(idx) + 1;
    const Vector& z = trajectory.measurements[idx];
    const GaussianBelief predicted = ekf_predict(belief, model, k);

    Vector estimate;
    if (particles) {
      ensemble = predict_particles(ensemble, model, k, rng);
      const Matrix P = config.covariance_source == CovarianceSource::ensemble_sample
                           ? sample_covariance(ensemble)
                           : predicted.covariance;
      ensemble = flow_update(ensemble, P, model, z, config);
      if (!ensemble.particles.allFinite()) throw FilterFailure(k, "non-finite particle");
      estimate = point_estimate(ensemble);
    }

    belief = ekf_update(predicted, model, z);
    if (!belief.mean.allFinite() || !belief.covariance.allFinite())
      throw FilterFailure(k, "non-finite EKF belief");
    if (!particles) estimate = belief.mean;
    out.push_back({std::move(estimate), belief});
  }
  return out;
}

}  // namespace pflow
