// ============================================================================
// ddc/commands.hpp - convergence sweep and single-run drivers
//
// Output layout under config.output_dir:
//   converge:  rates.csv             one row per level, fixed header
//              rates_report.txt      config echo, commit, per-level wall times
//              level_<inv_h>.csv     per-step errors of both trajectories
//   run:       diagnostics_<inv_h>.csv, summary_<inv_h>.txt,
//              snapshot_<inv_h>_<step>.vtk, errors_<inv_h>.csv (manufactured)
// ============================================================================
#pragma once

#include "ddc/analysis.hpp"
#include "ddc/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ddc {

/// Worker cap from DDC_THREADS (default: hardware concurrency, at least 1).
/// Throws ConfigError for a malformed value.
int worker_count();

struct ConvergeLevel {
  int inv_h = 0;
  SpaceTimeError first, correction;
  RunSummary summary;
  double max_divergence = 0.0;
  double seconds = 0.0;
};

struct ConvergeReport {
  RateTable table;
  std::vector<ConvergeLevel> levels;  // completed levels in config order
  bool complete = false;
  std::string failure;
};

/// One manufactured-solution level: advance with both error accumulators.
/// Per-step errors go to `per_step` when given.
ConvergeLevel run_convergence_level(const RunConfig& config, int level, std::ostream* per_step = nullptr);

/// Runs every level (concurrently up to worker_count()), writes rates.csv and
/// rates_report.txt. A failing level truncates the table at the first failure
/// and marks the CSV incomplete. Throws ConfigError unless the problem is
/// manufactured.
ConvergeReport cmd_converge(const RunConfig& config, std::ostream& log);

struct RunLevelResult {
  int inv_h = 0;
  RunSummary summary;
  std::vector<EnergyRecord> records;
  double min_slack = 0.0;
  double max_corrector_ratio = 0.0;
  double max_divergence = 0.0;
  double max_kinetic = 0.0;
  std::optional<int> steady_step;
  std::optional<double> steady_time;
  bool monotone_decay = false;
  std::optional<SpaceTimeError> first, correction;  // manufactured runs only
};

/// Single runs with diagnostics and snapshots, one per configured level.
/// Scheme failures propagate as SchemeError after the diagnostics written so
/// far are flushed.
std::vector<RunLevelResult> cmd_run(const RunConfig& config, std::ostream& log);

} // namespace ddc
