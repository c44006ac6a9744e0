#pragma once

// One experiment end to end: class validation, the flow with its monitor
// hook, and the artifacts in the output directory:
//
//   trajectory.csv   one MonitorRecord per row
//   diagnostics.csv  equivalence constants, Q argmax, endpoint drift
//   profile_initial.txt, profile_final.txt
//   manifest.txt     config echo, hash, termination, wall time
//   report.txt       written by `report`

#include "krf/config.hpp"
#include "krf/flow.hpp"
#include "krf/monitors.hpp"
#include "krf/rates.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace krf::experiment {

struct Validation {
  classes::ValidationReport report;
  std::string text;
  bool ok = false;
};

/// Class-side checks plus a readable summary (T, trajectory, residual, cone status).
Validation validate(const config::ExperimentConfig& cfg);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides the config
  std::optional<std::size_t> cadence;            // overrides the config
};

struct RunResult {
  flow::Termination termination = flow::Termination::ReachedStop;
  std::string message;
  std::vector<monitors::MonitorRecord> records;
  std::optional<double> first_violation;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t positivity_checks = 0;   // accepted states checked for u' > 0, u'' > 0
  std::size_t positivity_failures = 0;
  double A = 0.0;
  double wall_seconds = 0.0;
  std::filesystem::path out_dir;

  /// True when the run reached T - eps_stop with every accepted state positive.
  bool completed() const {
    return termination == flow::Termination::ReachedStop && positivity_failures == 0;
  }
};

std::filesystem::path resolve_out_dir(const config::ExperimentConfig& cfg, const RunOptions& opts);

/// Refuses (InvalidInput) before any output when validation fails.
RunResult run(const config::ExperimentConfig& cfg, const RunOptions& opts = {});

/// Reads the run's CSVs, writes report.txt next to them and returns the verdicts.
rates::Report report(const config::ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Report on an explicit trajectory file (diagnostics.csv is looked up beside it).
rates::Report report_file(const config::ExperimentConfig& cfg, const std::filesystem::path& trajectory_csv);

std::string version();

}  // namespace krf::experiment
