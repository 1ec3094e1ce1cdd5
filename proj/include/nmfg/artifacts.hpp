#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nmfg/config.hpp"
#include "nmfg/layout.hpp"
#include "nmfg/micro.hpp"
#include "nmfg/newton.hpp"

namespace nmfg {

/// Shortest-exact-or-17-significant-digit decimal text; round-trips to the
/// identical double and is locale independent.
std::string format_double(double value);

void write_macro_fields_csv(const std::string& path, const SolverState& state, const Grid& grid);
void write_fundamental_csv(const std::string& path, const SolverState& state, const Grid& grid);
void write_solve_report_json(const std::string& path, const std::vector<SolveReport>& reports,
                             const RunConfig& config, bool aborted = false,
                             int aborted_rung = -1);

struct MicroRunMetrics {
    int n = 0;           ///< per-section vehicle count
    int total = 0;       ///< vehicles overall
    double max_ra = 0.0;
    double mean_ra = 0.0;
    double mean_ev = 0.0;
    double max_ev = 0.0;
};

void write_micro_vehicles_csv(const std::string& path, const MicroEnsemble& ensemble);
void write_micro_costs_csv(const std::string& path, const MicroEnsemble& ensemble);
void write_accuracy_json(const std::string& path, const std::vector<MicroRunMetrics>& metrics,
                         double mu, double eta);

/// Writes a machine-readable failure record next to the partial artifacts.
void write_failure_json(const std::string& path, const std::string& message, int rung);

/// Full batch run: macro solve, artifact emission and (when enabled) the
/// micro validation ladder. Returns the process exit status.
int run(const RunConfig& config, std::ostream& log);

/// Prints a short human summary of the artifacts in a run directory.
int summarize_run(const std::string& dir, std::ostream& out);

}  // namespace nmfg
