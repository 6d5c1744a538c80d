#pragma once

#include "pflow/filters.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pflow {

enum class ModelKind { ungm, coupled };

std::string_view model_name(ModelKind m);
ModelKind parse_model(std::string_view name);

struct BenchConfig {
  ModelKind model = ModelKind::ungm;
  std::vector<int> dims{1};
  std::vector<int> particle_counts{10, 50, 100, 500};
  int lambda_steps = 10;
  int mc_runs = 100;
  int trajectory_steps = 100;
  std::uint64_t master_seed = 42;
  std::vector<Variant> filters{std::begin(kAllVariants), std::end(kAllVariants)};
  std::filesystem::path out_dir = ".";
  bool timing = true;

  // Ground truth starts at x0 ~ N(0, truth_init_std^2 I); 0 means x0 = 0.
  double truth_init_std = 1.0;
  // Filters start from N(m0, prior_std^2 I) with m0 = x0 when
  // prior_at_truth, else m0 = 0. With x0 = m0 = 0 the quadratic
  // measurement leaves the posterior symmetric under x -> -x.
  bool prior_at_truth = true;
  double prior_std = 1.0;
  // Covariance handed to the flows: the EKF prediction or the ensemble's.
  CovarianceSource covariance_source = CovarianceSource::ekf_prediction;

  // LEDH runs only with particles <= ledh_particle_cap once
  // dim >= ledh_cap_min_dim. A cap of 0 disables the trim.
  int ledh_particle_cap = 100;
  int ledh_cap_min_dim = 100;

  void validate() const;
};

struct RunRecord {
  std::string model;
  int dim = 0;
  Variant filter = Variant::ekf;
  int particles = 0;
  int lambda_steps = 0;
  int run_index = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double runtime_ms = 0.0;
  bool failed = false;
  std::string error;
};

/// Seed of one Monte Carlo run, mixed from every coordinate with SplitMix64:
///   s = mix64(mix64(mix64(mix64(master) ^ dim) ^ particles) ^ run_index)
std::uint64_t derive_run_seed(std::uint64_t master, int dim, int particles, int run_index);

/// Runs the whole sweep. Records come back in (dim, particles, filter,
/// run index) order. Filter exceptions become failed records.
std::vector<RunRecord> run_benchmark(const BenchConfig& config);

/// sqrt(mean_k |est_k - truth_k|^2).
double rmse(const std::vector<Vector>& truth, const std::vector<Vector>& estimates);

struct ReportRow {
  std::string model;
  int dim = 0;
  Variant filter = Variant::ekf;
  int particles = 0;
  int lambda_steps = 0;
  int mc_runs = 0;  // successful runs aggregated
  std::uint64_t seed = 0;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double runtime_ms_mean = 0.0;
  double rmse_rel_ekf = 0.0;
  double runtime_rel_ekf = 0.0;
};

using ReportTable = std::vector<ReportRow>;

/// Aggregates per (model, dim, particles, filter) and divides by the EKF
/// means of the same (model, dim, particles) group. Throws when a group has
/// no successful EKF run.
ReportTable normalize_vs_ekf(const std::vector<RunRecord>& records, std::uint64_t master_seed);

inline constexpr std::string_view kCsvHeader =
    "model,dim,filter,particles,n_lambda,mc_runs,seed,rmse_mean,rmse_std,runtime_ms_mean,"
    "rmse_rel_ekf,runtime_rel_ekf";

std::string render_csv(const ReportTable& table);
std::string render_runs_csv(const std::vector<RunRecord>& records);
/// One grid per (model, dim): rows RMSE_N / TIME_N, one column per filter.
std::string render_markdown(const ReportTable& table);
/// Runtime (log x) against RMSE, both relative to EKF; marker area grows
/// with the particle count.
std::string render_scatter_svg(const ReportTable& table);

void emit_csv(const ReportTable& table, const std::filesystem::path& path);
void emit_runs_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path);
void emit_markdown(const ReportTable& table, const std::filesystem::path& path);
void emit_scatter_svg(const ReportTable& table, const std::filesystem::path& path);

/// Shortest round-trip decimal, '.' separator, independent of locale.
std::string format_number(double v);

/// Parses a flat `key = value` file ('#' starts a comment) on top of `base`.
BenchConfig load_bench_config(const std::filesystem::path& path, BenchConfig base = {});
/// Applies one key/value pair; throws on unknown keys or bad values.
void apply_config_value(BenchConfig& config, std::string_view key, std::string_view value);

}  // namespace pflow
