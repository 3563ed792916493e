#pragma once

#include "gachaos/chaos_lab.hpp"
#include "gachaos/meanfield.hpp"
#include "gachaos/transport.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace gachaos {

/// printf("%.17g"), the round-trip format used in every CSV.
std::string format_real(double value);

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never see a partial file. Throws std::runtime_error when the
/// directory is not writable.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string rate_table_csv(const RateTable& table);   // param,mean_err,stderr,epsilon,slope_running
std::string trace_csv(const CoupledTrace& trace);     // step,E_n,bl_emp
std::string ga_summary_csv(const std::vector<GaSummaryRow>& rows, int dim);
std::string grid_csv(const GridDensity1D& density);   // cell_midpoint,mass
std::string plan_csv(const TransportPlan& plan);      // i,j,mass over positive cells

/// Log-log plot of mean error against the parameter with the fitted line.
/// Empty string for a table without positive rows.
std::string rate_table_svg(const RateTable& table);

nlohmann::json to_json(const RateTable& table);
nlohmann::json to_json(const CoupledTrace& trace);
nlohmann::json to_json(const SuiteReport& report);
nlohmann::json to_json(const MomentSummary& summary);

/// Writes <name>.csv and, for tables with data, <name>.svg into `dir`.
/// Returns the files written.
std::vector<std::filesystem::path> emit_rate_table(const std::filesystem::path& dir, const RateTable& table);

}  // namespace gachaos
