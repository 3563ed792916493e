#include "gachaos/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gachaos {

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string rate_table_csv(const RateTable& table) {
  std::string s = "param,mean_err,stderr,epsilon,slope_running\n";
  for (const auto& r : table.rows)
    s += format_real(r.param) + "," + format_real(r.mean_err) + "," + format_real(r.stderr_) + "," +
         format_real(r.epsilon) + "," + format_real(r.slope_running) + "\n";
  return s;
}

std::string trace_csv(const CoupledTrace& trace) {
  std::string s = "step,E_n,bl_emp\n";
  for (const auto& r : trace.rows)
    s += std::to_string(r.step) + "," + format_real(r.e_n) + "," + format_real(r.bl_emp) + "\n";
  return s;
}

std::string ga_summary_csv(const std::vector<GaSummaryRow>& rows, int dim) {
  std::string s = "step";
  for (int k = 1; k <= dim; ++k) s += ",mean_" + std::to_string(k);
  s += ",m2,mq,best_fitness\n";
  for (const auto& r : rows) {
    s += std::to_string(r.step);
    for (Eigen::Index k = 0; k < r.mean.size(); ++k) s += "," + format_real(r.mean(k));
    s += "," + format_real(r.m2) + "," + format_real(r.mq) + "," + format_real(r.best_fitness) + "\n";
  }
  return s;
}

std::string grid_csv(const GridDensity1D& density) {
  std::string s = "cell_midpoint,mass\n";
  for (std::size_t k = 0; k < density.grid().cells; ++k)
    s += format_real(density.grid().midpoint(k)) + "," +
         format_real(density.masses()(static_cast<Eigen::Index>(k))) + "\n";
  return s;
}

std::string plan_csv(const TransportPlan& plan) {
  std::string s = "i,j,mass\n";
  for (Eigen::Index i = 0; i < plan.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.cols(); ++j)
      if (plan.mass(i, j) > 0.0) s += std::to_string(i) + "," + std::to_string(j) + "," + format_real(plan.mass(i, j)) + "\n";
  return s;
}

std::string rate_table_svg(const RateTable& table) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : table.rows)
    if (r.param > 0.0 && r.mean_err > 0.0) pts.emplace_back(std::log10(r.param), std::log10(r.mean_err));
  if (pts.empty()) return {};
  double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
  for (auto [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  const double padx = std::max(0.1, 0.08 * (x1 - x0)), pady = std::max(0.1, 0.08 * (y1 - y0));
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;
  const double w = 480, h = 360, m = 50;
  auto sx = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto sy = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  char buf[256];
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
  o << "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                m, m, w - 2 * m, h - 2 * m);
  o << buf;
  for (auto [x, y] : pts) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"4\" fill=\"steelblue\"/>\n", sx(x), sy(y));
    o << buf;
  }
  if (std::isfinite(table.fit.slope)) {
    // intercept is in natural logs; convert to log10 coordinates
    auto fy = [&](double x) { return table.fit.slope * x + table.fit.intercept / std::log(10.0); };
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"firebrick\" stroke-dasharray=\"6 4\"/>\n",
                  sx(x0 + padx), sy(fy(x0 + padx)), sx(x1 - padx), sy(fy(x1 - padx)));
    o << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"30\" font-family=\"sans-serif\" font-size=\"14\">%s: slope %.4f</text>\n",
                  m, table.name.c_str(), table.fit.slope);
    o << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\">log10 param [%.2f, %.2f]</text>\n", m,
                h - 15, x0, x1);
  o << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"10\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 10 %g)\">log10 error [%.2f, %.2f]</text>\n",
                h - m, h - m, y0, y1);
  o << buf;
  o << "</svg>\n";
  return o.str();
}

namespace {

nlohmann::json real(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const MomentSummary& s) {
  return {{"trajectories", s.trajectories},
          {"failures", s.failures},
          {"constant", real(s.constant)},
          {"max_required_constant", real(s.max_required_constant)},
          {"max_root", real(s.max_root)},
          {"pass", s.ok()}};
}

nlohmann::json to_json(const RateTable& t) {
  return {{"name", t.name},
          {"rows", t.rows.size()},
          {"slope", real(t.fit.slope)},
          {"slope_ci", {real(t.fit.ci_lo), real(t.fit.ci_hi)}},
          {"fit_first_row", t.fit_first_row},
          {"target_slope", t.target_slope},
          {"band", {t.band_lo, t.band_hi}},
          {"pass", t.slope_in_band()},
          {"insufficient_replicas", t.insufficient_replicas},
          {"monotone", t.monotone},
          {"reference_error", t.reference_error},
          {"snapshot_stride", t.snapshot_stride},
          {"moments", to_json(t.moments)}};
}

nlohmann::json to_json(const CoupledTrace& t) {
  return {{"population", t.population},
          {"replicas", t.replicas},
          {"steps", t.rows.empty() ? 0 : t.rows.back().step},
          {"initial_zero", t.initial_zero},
          {"coupling_bound", t.coupling_bound},
          {"max_bound_excess", real(t.max_bound_excess)},
          {"checks", t.checks},
          {"pass", t.initial_zero && t.coupling_bound}};
}

nlohmann::json to_json(const SuiteReport& r) {
  return {{"name", r.name},
          {"cases", r.cases},
          {"violations", r.violations},
          {"max_ratio", real(r.max_ratio)},
          {"bound", real(r.bound)},
          {"pass", r.passed()}};
}

std::vector<std::filesystem::path> emit_rate_table(const std::filesystem::path& dir, const RateTable& table) {
  std::vector<std::filesystem::path> files;
  const auto csv = dir / (table.name + ".csv");
  write_file_atomic(csv, rate_table_csv(table));
  files.push_back(csv);
  const auto svg = rate_table_svg(table);
  if (!svg.empty()) {
    const auto path = dir / (table.name + ".svg");
    write_file_atomic(path, svg);
    files.push_back(path);
  }
  return files;
}

}  // namespace gachaos
