#pragma once

// Experiment configuration: a plain-text file of `key = value` lines grouped
// under [section] headers. '#' starts a comment. Intersection numbers are
// written as `gen1.gen2...genN = p/q` in the [intersection] section.

#include "krf/calabi.hpp"
#include "krf/classes.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace krf::config {

struct SolverSettings {
  std::size_t N = 512;       // momentum intervals
  double R = 6.0;            // half-width of the rho window for profile dumps
  std::size_t dump_points = 257;
  double dt_max = 1e-2;
  double eps_stop = 1e-4;
  double safety = 0.9;
  double tolerance = 1e-12;  // per-step error target (max norm)
  double kappa = 0.05;       // dt <= kappa (T - t)
  double dt_floor = 1e-15;
  double gauge = 0.0;        // constant c in du/dt = G + c
};

struct MonitorSettings {
  std::size_t cadence = 200;  // accepted steps between records
  double B = 10.0;
  std::optional<double> A;
};

struct Expectation {
  std::string quantity;
  double exponent = 0.0;
  double tolerance = 0.0;
  bool lower_bound_only = false;  // check exponent >= expected - tolerance
};

struct RatesSettings {
  double window_decades = 1.0;
  std::vector<Expectation> expectations;
  double bounded_factor = 10.0;
  std::vector<std::string> bounded;
};

struct ExperimentConfig {
  calabi::AnsatzKind kind = calabi::AnsatzKind::ProjectiveBundleK1;
  int n = 2;
  classes::ClassData classes;
  SolverSettings solver;
  MonitorSettings monitor;
  RatesSettings rates;
  std::string output_dir = "out";
  std::string source_text;
  std::string origin;
};

ExperimentConfig parse_experiment(std::string_view text, const std::string& origin = "<string>");
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// FNV-1a over the raw configuration text, hex encoded.
std::string content_hash(std::string_view text);

}  // namespace krf::config
