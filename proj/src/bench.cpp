#include "pflow/bench.hpp"

#include <chrono>
#include <cmath>

namespace pflow {

std::string_view model_name(ModelKind m) { return m == ModelKind::ungm ? "ungm" : "coupled"; }

ModelKind parse_model(std::string_view name) {
  if (name == "ungm") return ModelKind::ungm;
  if (name == "coupled") return ModelKind::coupled;
  throw Error("unknown model '" + std::string(name) + "'");
}

void BenchConfig::validate() const {
  if (dims.empty() || particle_counts.empty()) throw Error("bench: dims and particles must be set");
  for (int d : dims)
    if (d < 1) throw Error("bench: dims must be positive");
  if (model == ModelKind::ungm && (dims.size() != 1 || dims[0] != 1))
    throw Error("bench: the ungm model is one-dimensional (dims = 1)");
  for (int p : particle_counts)
    if (p < 1) throw Error("bench: particle counts must be positive");
  if (lambda_steps < 1 || mc_runs < 1 || trajectory_steps < 1)
    throw Error("bench: lambda_steps, mc_runs and steps must be positive");
  if (filters.empty()) throw Error("bench: no filters selected");
  if (truth_init_std < 0.0 || !(prior_std > 0.0)) throw Error("bench: bad initial spread");
}

std::uint64_t derive_run_seed(std::uint64_t master, int dim, int particles, int run_index) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ static_cast<std::uint64_t>(dim));
  s = mix64(s ^ static_cast<std::uint64_t>(particles));
  return mix64(s ^ static_cast<std::uint64_t>(run_index));
}

double rmse(const std::vector<Vector>& truth, const std::vector<Vector>& estimates) {
  if (truth.size() != estimates.size()) throw Error("rmse: length mismatch");
  if (truth.empty()) throw Error("rmse: empty sequence");
  double sum = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) sum += (estimates[k] - truth[k]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

namespace {

bool ledh_trimmed(const BenchConfig& config, int dim, int particles) {
  return config.ledh_particle_cap > 0 && dim >= config.ledh_cap_min_dim &&
         particles > config.ledh_particle_cap;
}

}  // namespace

std::vector<RunRecord> run_benchmark(const BenchConfig& config) {
  config.validate();
  std::vector<RunRecord> records;

  for (int dim : config.dims) {
    for (int particles : config.particle_counts) {
      std::vector<std::vector<RunRecord>> per_filter(config.filters.size());
      for (int run = 0; run < config.mc_runs; ++run) {
        const std::uint64_t seed = derive_run_seed(config.master_seed, dim, particles, run);

        // One system, one trajectory and one noise stream per run, shared by
        // every filter (common random numbers).
        Rng system_rng(mix64(seed ^ 0x5157ULL));
        const SystemModel model = config.model == ModelKind::ungm
                                      ? ungm_model()
                                      : random_coupled_model(dim, system_rng);
        Vector x0 = Vector::Zero(model.n_x);
        if (config.truth_init_std > 0.0)
          x0 = config.truth_init_std * standard_normal(model.n_x, system_rng);
        const Trajectory traj = simulate(model, x0, config.trajectory_steps, system_rng);
        const std::uint64_t filter_seed = mix64(seed ^ 0xF117ULL);

        for (std::size_t f = 0; f < config.filters.size(); ++f) {
          const Variant variant = config.filters[f];
          if (variant == Variant::ledh && ledh_trimmed(config, dim, particles)) continue;

          FilterConfig fc;
          fc.variant = variant;
          fc.particle_count = particles;
          fc.lambda_steps = config.lambda_steps;
          fc.covariance_source = config.covariance_source;
          fc.initial_mean = config.prior_at_truth ? x0 : Vector::Zero(model.n_x);
          fc.initial_covariance =
              config.prior_std * config.prior_std * Matrix::Identity(model.n_x, model.n_x);

          RunRecord rec;
          rec.model = std::string(model_name(config.model));
          rec.dim = static_cast<int>(model.n_x);
          rec.filter = variant;
          rec.particles = particles;
          rec.lambda_steps = config.lambda_steps;
          rec.run_index = run;
          rec.seed = seed;

          Rng filter_rng(filter_seed);
          const auto start = std::chrono::steady_clock::now();
          try {
            const auto steps = run_filter(model, traj, fc, filter_rng);
            const auto stop = std::chrono::steady_clock::now();
            std::vector<Vector> estimates;
            estimates.reserve(steps.size());
            for (const auto& s : steps) estimates.push_back(s.estimate);
            rec.rmse = rmse(traj.states, estimates);
            if (config.timing)
              rec.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
          } catch (const Error& e) {
            rec.failed = true;
            rec.error = e.what();
          }
          per_filter[f].push_back(std::move(rec));
        }
      }
      for (auto& group : per_filter)
        for (auto& rec : group) records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace pflow
