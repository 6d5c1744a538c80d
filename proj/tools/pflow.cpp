#include "pflow/bench.hpp"
#include "pflow/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace pflow;

struct BenchOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> mc_runs;
  std::vector<int> dims;
  std::vector<int> particles;
  std::vector<std::string> filters;
  bool no_timing = false;
  bool strict = false;
  bool full_sweep = false;
};

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

void write_metadata(const BenchConfig& c, const std::vector<RunRecord>& records,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  int failed = 0;
  for (const auto& r : records) failed += r.failed ? 1 : 0;
  out << "model = " << model_name(c.model) << '\n'
      << "dims = " << join(c.dims) << '\n'
      << "particles = " << join(c.particle_counts) << '\n'
      << "lambda_steps = " << c.lambda_steps << '\n'
      << "mc_runs = " << c.mc_runs << '\n'
      << "steps = " << c.trajectory_steps << '\n'
      << "seed = " << c.master_seed << '\n'
      << "filters = ";
  for (std::size_t i = 0; i < c.filters.size(); ++i)
    out << (i ? "," : "") << variant_name(c.filters[i]);
  out << '\n'
      << "timing = " << (c.timing ? "true" : "false") << '\n'
      << "truth_init_std = " << format_number(c.truth_init_std) << '\n'
      << "prior_at_truth = " << (c.prior_at_truth ? "true" : "false") << '\n'
      << "prior_std = " << format_number(c.prior_std) << '\n'
      << "ledh_particle_cap = " << c.ledh_particle_cap << '\n'
      << "ledh_cap_min_dim = " << c.ledh_cap_min_dim << '\n'
      << "# common random numbers: every filter of a run sees the same system,\n"
      << "# trajectory and prediction noise stream\n"
      << "# run seed = mix64(mix64(mix64(mix64(seed) ^ dim) ^ particles) ^ run)\n"
      << "records = " << records.size() << '\n'
      << "failed_runs = " << failed << '\n';
}

int run_bench(const BenchOptions& opt) {
  BenchConfig config;
  if (const char* env = std::getenv("PFLOW_SEED")) apply_config_value(config, "seed", env);
  if (!opt.config_path.empty()) config = load_bench_config(opt.config_path, config);
  if (!opt.out_dir.empty()) config.out_dir = opt.out_dir;
  if (opt.seed) config.master_seed = *opt.seed;
  if (opt.mc_runs) config.mc_runs = *opt.mc_runs;
  if (!opt.dims.empty()) config.dims = opt.dims;
  if (!opt.particles.empty()) config.particle_counts = opt.particles;
  if (!opt.filters.empty()) {
    config.filters.clear();
    for (const auto& f : opt.filters) config.filters.push_back(parse_variant(f));
  }
  if (opt.no_timing) config.timing = false;
  if (opt.full_sweep) config.ledh_particle_cap = 0;
  config.validate();

  const auto records = run_benchmark(config);
  const auto table = normalize_vs_ekf(records, config.master_seed);
  const auto& dir = config.out_dir;
  std::filesystem::create_directories(dir);
  emit_csv(table, dir / "summary.csv");
  emit_runs_csv(records, dir / "runs.csv");
  emit_markdown(table, dir / "table.md");
  emit_scatter_svg(table, dir / "scatter.svg");
  write_metadata(config, records, dir / "metadata.txt");

  std::cout << render_markdown(table);
  int failed = 0;
  for (const auto& r : records) failed += r.failed ? 1 : 0;
  if (failed > 0) std::cerr << failed << " of " << records.size() << " runs failed\n";
  return opt.strict && failed > 0 ? 3 : 0;
}

int run_verify(int instances, std::uint64_t seed) {
  struct Entry {
    CheckResult (*check)(int, Rng&);
    double tolerance;
    bool strict;  // max_error must stay strictly below the tolerance
  };
  const Entry entries[] = {
      {check_commutativity, 1e-10, false},
      {check_transition, 1e-8, false},
      {check_psi, 1e-6, false},
      {[](int n, Rng& rng) { return check_rk4(n, rng); }, 1e-6, false},
      {check_kalman, 1e-8, false},
      {check_semigroup, 1e-10, false},
      {check_euler, 1.0, true},
  };
  bool ok = true;
  std::printf("%-14s %9s %14s %10s %8s\n", "check", "instances", "max_deviation", "tolerance",
              "seconds");
  for (std::size_t i = 0; i < std::size(entries); ++i) {
    Rng rng(mix64(seed + i));
    const auto res = entries[i].check(instances, rng);
    const bool pass = entries[i].strict ? res.max_error < entries[i].tolerance
                                        : res.max_error <= entries[i].tolerance;
    ok = ok && pass;
    std::printf("%-14s %9d %14.3e %10.0e %8.2f %s\n", res.name.c_str(), res.instances,
                res.max_error, entries[i].tolerance, res.seconds, pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

int run_simulate(const std::string& model_id, int dim, int steps, std::uint64_t seed,
                 const std::string& out_path) {
  Rng rng(seed);
  const SystemModel model =
      parse_model(model_id) == ModelKind::ungm ? ungm_model() : random_coupled_model(dim, rng);
  const auto traj = simulate(model, Vector::Zero(model.n_x), steps, rng);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw Error("cannot open '" + out_path + "' for writing");
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << 'k';
  for (Eigen::Index i = 0; i < model.n_x; ++i) out << ",x" << i + 1;
  for (Eigen::Index i = 0; i < model.n_z; ++i) out << ",z" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    out << k + 1;
    for (double v : traj.states[k]) out << ',' << format_number(v);
    for (double v : traj.measurements[k]) out << ',' << format_number(v);
    out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle flow filters with analytic flow solutions"};
  app.require_subcommand(1);

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo benchmark, RMSE and runtime vs EKF");
  bench_cmd->add_option("--config", bench.config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--out-dir", bench.out_dir, "Output directory");
  bench_cmd->add_option("--seed", bench.seed, "Master seed (fallback: PFLOW_SEED)");
  bench_cmd->add_option("--mc-runs", bench.mc_runs, "Monte Carlo runs per configuration");
  bench_cmd->add_option("--dims", bench.dims, "State dimensions (coupled model)")->delimiter(',');
  bench_cmd->add_option("--particles", bench.particles, "Particle counts")->delimiter(',');
  bench_cmd->add_option("--filters", bench.filters, "Subset of EKF,EDH,LEDH,A-EDH,NA-EDH")
      ->delimiter(',');
  bench_cmd->add_flag("--no-timing", bench.no_timing, "Zero the runtime columns");
  bench_cmd->add_flag("--strict", bench.strict, "Exit nonzero if any run failed");
  bench_cmd->add_flag("--full-sweep", bench.full_sweep, "Run LEDH at every particle count");

  int instances = 100;
  std::uint64_t verify_seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "Check the closed forms against the oracles");
  verify_cmd->add_option("--instances", instances, "Random instances per check")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", verify_seed, "Seed");

  std::string model_id = "ungm", sim_out;
  int sim_dim = 10, sim_steps = 100;
  std::uint64_t sim_seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a simulated trajectory as CSV");
  sim_cmd->add_option("--model", model_id, "ungm or coupled")
      ->check(CLI::IsMember({"ungm", "coupled"}));
  sim_cmd->add_option("--dim", sim_dim, "State dimension (coupled)")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--steps", sim_steps, "Time steps")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_seed, "Seed");
  sim_cmd->add_option("--out", sim_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench_cmd) return run_bench(bench);
    if (*verify_cmd) return run_verify(instances, verify_seed);
    if (*sim_cmd) return run_simulate(model_id, sim_dim, sim_steps, sim_seed, sim_out);
  } catch (const std::exception& e) {
    std::cerr << "pflow: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
