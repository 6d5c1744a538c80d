#include "pflow/bench.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace pflow {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    const auto pos = s.find(',');
    const auto item = trim(s.substr(0, pos));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw Error("config: bad value '" + std::string(text) + "' for " + std::string(key));
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw Error("config: bad boolean '" + std::string(text) + "' for " + std::string(key));
}

std::vector<int> parse_int_list(std::string_view key, std::string_view text) {
  std::vector<int> out;
  for (auto item : split_list(text)) out.push_back(parse_number<int>(key, item));
  if (out.empty()) throw Error("config: empty list for " + std::string(key));
  return out;
}

}  // namespace

void apply_config_value(BenchConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "model") {
    c.model = parse_model(value);
  } else if (key == "dims") {
    c.dims = parse_int_list(key, value);
  } else if (key == "particles") {
    c.particle_counts = parse_int_list(key, value);
  } else if (key == "lambda_steps") {
    c.lambda_steps = parse_number<int>(key, value);
  } else if (key == "mc_runs") {
    c.mc_runs = parse_number<int>(key, value);
  } else if (key == "steps") {
    c.trajectory_steps = parse_number<int>(key, value);
  } else if (key == "seed") {
    c.master_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "filters") {
    c.filters.clear();
    for (auto item : split_list(value)) c.filters.push_back(parse_variant(item));
    if (c.filters.empty()) throw Error("config: empty list for filters");
  } else if (key == "out_dir") {
    c.out_dir = std::string(value);
  } else if (key == "timing") {
    c.timing = parse_bool(key, value);
  } else if (key == "truth_init_std") {
    c.truth_init_std = parse_number<double>(key, value);
  } else if (key == "prior_at_truth") {
    c.prior_at_truth = parse_bool(key, value);
  } else if (key == "prior_std") {
    c.prior_std = parse_number<double>(key, value);
  } else if (key == "covariance") {
    if (value == "ekf")
      c.covariance_source = CovarianceSource::ekf_prediction;
    else if (value == "ensemble")
      c.covariance_source = CovarianceSource::ensemble_sample;
    else
      throw Error("config: covariance must be ekf or ensemble");
  } else if (key == "ledh_particle_cap") {
    c.ledh_particle_cap = parse_number<int>(key, value);
  } else if (key == "ledh_cap_min_dim") {
    c.ledh_cap_min_dim = parse_number<int>(key, value);
  } else {
    throw Error("config: unknown key '" + std::string(key) + "'");
  }
}

BenchConfig load_bench_config(const std::filesystem::path& path, BenchConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      apply_config_value(base, trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

}  // namespace pflow
