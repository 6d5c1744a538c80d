#include "pflow/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace pflow {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

using GroupKey = std::tuple<std::string, int, int>;  // model, dim, particles

struct Accumulator {
  std::vector<double> rmse;
  std::vector<double> runtime;
  int lambda_steps = 0;
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? std::nan("") : 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fixed5(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

ReportTable normalize_vs_ekf(const std::vector<RunRecord>& records, std::uint64_t master_seed) {
  std::vector<GroupKey> group_order;
  std::map<GroupKey, std::vector<Variant>> filter_order;
  std::map<std::pair<GroupKey, Variant>, Accumulator> acc;

  for (const auto& rec : records) {
    const GroupKey key{rec.model, rec.dim, rec.particles};
    auto& filters = filter_order[key];
    if (filters.empty()) group_order.push_back(key);
    if (std::find(filters.begin(), filters.end(), rec.filter) == filters.end())
      filters.push_back(rec.filter);
    auto& a = acc[{key, rec.filter}];
    a.lambda_steps = rec.lambda_steps;
    if (rec.failed) continue;
    a.rmse.push_back(rec.rmse);
    a.runtime.push_back(rec.runtime_ms);
  }

  ReportTable table;
  for (const auto& key : group_order) {
    const auto ekf = acc.find({key, Variant::ekf});
    if (ekf == acc.end() || ekf->second.rmse.empty())
      throw Error("normalize_vs_ekf: no EKF baseline for " + std::get<0>(key) + " dim " +
                  std::to_string(std::get<1>(key)) + " particles " +
                  std::to_string(std::get<2>(key)));
    const double ekf_rmse = mean(ekf->second.rmse);
    const double ekf_time = mean(ekf->second.runtime);

    for (Variant v : filter_order[key]) {
      const auto& a = acc[{key, v}];
      ReportRow row;
      row.model = std::get<0>(key);
      row.dim = std::get<1>(key);
      row.particles = std::get<2>(key);
      row.filter = v;
      row.lambda_steps = a.lambda_steps;
      row.mc_runs = static_cast<int>(a.rmse.size());
      row.seed = master_seed;
      row.rmse_mean = mean(a.rmse);
      row.rmse_std = stddev(a.rmse);
      row.runtime_ms_mean = mean(a.runtime);
      if (v == Variant::ekf) {
        row.rmse_rel_ekf = 1.0;
        row.runtime_rel_ekf = 1.0;
      } else {
        row.rmse_rel_ekf = row.rmse_mean / ekf_rmse;
        // Timing disabled: every runtime is zero and so is the ratio.
        row.runtime_rel_ekf = ekf_time > 0.0 ? row.runtime_ms_mean / ekf_time : 0.0;
      }
      table.push_back(std::move(row));
    }
  }
  return table;
}

std::string render_csv(const ReportTable& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : table) {
    out += r.model + ',' + std::to_string(r.dim) + ',' + std::string(variant_name(r.filter)) + ',' +
           std::to_string(r.particles) + ',' + std::to_string(r.lambda_steps) + ',' +
           std::to_string(r.mc_runs) + ',' + std::to_string(r.seed) + ',' +
           format_number(r.rmse_mean) + ',' + format_number(r.rmse_std) + ',' +
           format_number(r.runtime_ms_mean) + ',' + format_number(r.rmse_rel_ekf) + ',' +
           format_number(r.runtime_rel_ekf) + '\n';
  }
  return out;
}

std::string render_runs_csv(const std::vector<RunRecord>& records) {
  std::string out = "model,dim,filter,particles,n_lambda,run,seed,rmse,runtime_ms,failed,error\n";
  for (const auto& r : records) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    out += r.model + ',' + std::to_string(r.dim) + ',' + std::string(variant_name(r.filter)) + ',' +
           std::to_string(r.particles) + ',' + std::to_string(r.lambda_steps) + ',' +
           std::to_string(r.run_index) + ',' + std::to_string(r.seed) + ',' +
           format_number(r.rmse) + ',' + format_number(r.runtime_ms) + ',' +
           (r.failed ? "1" : "0") + ',' + err + '\n';
  }
  return out;
}

std::string render_markdown(const ReportTable& table) {
  std::vector<std::pair<std::string, int>> groups;
  for (const auto& r : table) {
    const std::pair<std::string, int> g{r.model, r.dim};
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }

  std::ostringstream out;
  for (const auto& [model, dim] : groups) {
    std::vector<Variant> cols;
    std::vector<int> counts;
    std::map<std::pair<int, Variant>, const ReportRow*> cell;
    for (const auto& r : table) {
      if (r.model != model || r.dim != dim) continue;
      cell[{r.particles, r.filter}] = &r;
      if (std::find(counts.begin(), counts.end(), r.particles) == counts.end())
        counts.push_back(r.particles);
    }
    for (Variant v : kAllVariants)
      for (const auto& [k, row] : cell)
        if (k.second == v) {
          cols.push_back(v);
          break;
        }

    out << "### " << model << ", dim " << dim << "\n\n| Performance |";
    for (Variant v : cols) out << ' ' << variant_name(v) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
    out << '\n';
    for (int n : counts) {
      for (int metric = 0; metric < 2; ++metric) {
        out << "| " << (metric == 0 ? "RMSE_" : "TIME_") << n << " |";
        for (Variant v : cols) {
          const auto it = cell.find({n, v});
          std::string text = "-";
          if (it != cell.end())
            text = fixed5(metric == 0 ? it->second->rmse_mean : it->second->runtime_ms_mean);
          out << ' ' << text << " |";
        }
        out << '\n';
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string render_scatter_svg(const ReportTable& table) {
  constexpr double kWidth = 640, kHeight = 480, kLeft = 70, kRight = 150, kTop = 30, kBottom = 60;
  struct Point {
    double x, y, r;
    const ReportRow* row;
  };
  std::vector<Point> pts;
  for (const auto& row : table) {
    if (!(row.runtime_rel_ekf > 0.0) || !std::isfinite(row.rmse_rel_ekf)) continue;
    pts.push_back({std::log10(row.runtime_rel_ekf), row.rmse_rel_ekf,
                   std::max(2.0, 2.5 * std::sqrt(row.particles / 10.0)), &row});
  }

  double xmin = 0.0, xmax = 0.0, ymin = 1.0, ymax = 1.0;
  if (!pts.empty()) {
    xmin = xmax = pts[0].x;
    ymin = ymax = pts[0].y;
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  const double xpad = xmax > xmin ? 0.08 * (xmax - xmin) : 0.5;
  const double ypad = ymax > ymin ? 0.08 * (ymax - ymin) : 0.1 * std::max(1.0, std::abs(ymax));
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * plot_h; };
  auto color = [](Variant v) -> const char* {
    switch (v) {
      case Variant::ekf: return "#000000";
      case Variant::edh: return "#1f77b4";
      case Variant::ledh: return "#2ca02c";
      case Variant::aedh: return "#d62728";
      case Variant::naedh: return "#ff7f0e";
    }
    return "#777777";
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Decade ticks on x.
  for (int d = static_cast<int>(std::ceil(xmin)); d <= static_cast<int>(std::floor(xmax)); ++d) {
    const double x = sx(d);
    out << "<line x1=\"" << x << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << x << "\" y2=\""
        << kTop + plot_h + 5 << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">1e"
        << d << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double y = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">"
        << fixed5(y) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">runtime / EKF runtime (log)</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">RMSE / EKF RMSE</text>\n";

  for (const auto& p : pts) {
    out << "<circle class=\"point\" cx=\"" << format_number(sx(p.x)) << "\" cy=\""
        << format_number(sy(p.y)) << "\" r=\"" << format_number(p.r) << "\" fill=\""
        << color(p.row->filter) << "\" fill-opacity=\"0.6\" data-filter=\""
        << variant_name(p.row->filter) << "\" data-particles=\"" << p.row->particles
        << "\" data-runtime-rel=\"" << format_number(p.row->runtime_rel_ekf)
        << "\" data-rmse-rel=\"" << format_number(p.row->rmse_rel_ekf) << "\"/>\n";
  }

  double ly = kTop + 10;
  for (Variant v : kAllVariants) {
    out << "<circle cx=\"" << kWidth - kRight + 20 << "\" cy=\"" << ly << "\" r=\"5\" fill=\""
        << color(v) << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 32 << "\" y=\"" << ly + 4 << "\">" << variant_name(v)
        << "</text>\n";
    ly += 20;
  }
  out << "<text x=\"" << kWidth - kRight + 12 << "\" y=\"" << ly + 10
      << "\" font-size=\"10\">larger marker = more particles</text>\n";
  out << "</svg>\n";
  return out.str();
}

void emit_csv(const ReportTable& table, const std::filesystem::path& path) {
  write_file(path, render_csv(table));
}
void emit_runs_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  write_file(path, render_runs_csv(records));
}
void emit_markdown(const ReportTable& table, const std::filesystem::path& path) {
  write_file(path, render_markdown(table));
}
void emit_scatter_svg(const ReportTable& table, const std::filesystem::path& path) {
  write_file(path, render_scatter_svg(table));
}

}  // namespace pflow
