#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "motsim/config.hpp"
#include "motsim/diagnostics.hpp"

namespace motsim {

/// Exit codes shared by the CLI: the scientific outcome is the status.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitBudget = 2;
inline constexpr int kExitAborted = 3;
inline constexpr int kExitIo = 4;

/// Everything a finished run leaves behind, besides the files on disk.
struct RunArtifacts {
  int exit_code = kExitIo;
  RunReport report;
  double v_floor = 0.0;
  bool v_floor_breached = false;
  double duality_window_peak = 0.0;  // NaN when no unit window completed
  CumulativeIntegrals totals;
  std::string error;  // validation / io message when the run never started
};

/// Executes one configured run: writes <out_dir>/diagnostics.csv,
/// <out_dir>/report.json and snapshot_<k>.ksf for each requested snapshot
/// time. quiet suppresses the stdout summary (used by sweeps).
RunArtifacts execute_run(const RunConfig& cfg, const std::string& out_dir,
                         bool quiet = false);

int run_command(const RunConfig& cfg, const std::string& out_dir);

struct SweepRow {
  double d_coef = 0.0;
  std::string classification;  // run class name, or "error"
  double final_norm = 0.0;
  double time_to_tolerance = 0.0;  // infinity unless converged
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> threshold_candidate;  // smallest converged D
  int exit_code = 0;
};

/// Runs the config once per D (ascending), sharing the initial data; rows are
/// reported in D order regardless of the worker count, so sweep tables are
/// reproducible. Per-run failures land in the row, not the sweep status.
/// Writes <out_dir>/sweep.csv and <out_dir>/sweep.json plus one subdirectory
/// per D value.
SweepResult sweep_command(const RunConfig& cfg, std::span<const double> d_values,
                          const std::string& out_dir, int threads);

/// Prints the homogeneous-reduction RK4 trajectory as CSV (t,u,v,w) using the
/// means of the configured initial data, dt_init as the step and the
/// sampling stride for output rows.
int oracle_command(const RunConfig& cfg, std::ostream& out);

/// Fixed, versioned schema: header plus rows of exactly 16 fields,
/// serialized with 17 significant digits.
extern const char* const kDiagnosticsCsvHeader;
void write_csv_row(std::ostream& out, const DiagnosticsRecord& rec,
                   const CumulativeIntegrals& totals);
std::string format_g17(double x);

}  // namespace motsim
