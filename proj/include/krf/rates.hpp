#pragma once

// Power-law rates of monitored series near the singular time: fits of
// log value against log(T - t). Decay gives a positive exponent (diameter
// ~ (T - t)^{1/2}), blow-up a negative one (R ~ (T - t)^{-1}).

#include "krf/config.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace krf::rates {

struct Window {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log value at T - t = 1
  Window window;
  double residual_rms = 0.0;
  double exponent_stderr = 0.0;
  std::size_t n_points = 0;
};

inline constexpr std::size_t kMinFitPoints = 8;

/// Least squares over the samples with t in [t_lo, t_hi].
RateFit fit_power_law(std::span<const double> t, std::span<const double> value, double T, Window window);

/// The last `decades` decades of T - t ending at t_end.
Window last_decades(double T, double t_end, double decades);

/// `count` windows of width `decades`, each shifted toward T by `shift` decades,
/// the last one ending at t_end. Ordered from far to near.
std::vector<Window> approaching_windows(double T, double t_end, double decades, double shift, std::size_t count);

struct Stability {
  std::vector<RateFit> fits;
  std::vector<double> drift;  // |exponent_k - exponent_{k-1}|
};
Stability windowed_stability(std::span<const double> t, std::span<const double> value, double T,
                             std::span<const Window> windows);

// ---------------------------------------------------------------------------
// CSV tables and the report.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t index(const std::string& column) const;  // throws on a missing column
  std::vector<double> column(const std::string& name) const;
};

/// Parses a header row plus numeric rows. `expected` (if nonempty) must match
/// the header exactly, column by column.
Table read_csv(std::istream& in, const std::string& origin, const std::vector<std::string>& expected = {});

struct RateVerdict {
  std::string quantity;
  config::Expectation expected;
  std::optional<RateFit> fit;
  std::string error;  // fit failure, if any
  bool pass = false;
};

struct BoundednessVerdict {
  std::string quantity;
  double run_max = 0.0;
  double early_max = 0.0;
  double limit = 0.0;
  std::string error;
  bool pass = false;
};

struct Report {
  double T = 0.0;
  std::size_t records = 0;
  std::size_t fitted_records = 0;  // records with the Ricci hypothesis intact
  std::optional<double> first_violation;
  std::vector<RateVerdict> rates;
  std::vector<RateVerdict> rates_violated;  // same fits on all records, reported only
  std::vector<BoundednessVerdict> bounded;
  bool pass = false;
};

/// Index range of the records in the first tenth of the run, measured in
/// log(T - t) from the first record to the last.
std::size_t early_count(std::span<const double> t, double T);

/// Builds rate and boundedness verdicts. `diagnostics` supplies c_low/c_high
/// for the "equivalence" check.
Report build_report(const Table& trajectory, const Table* diagnostics, const config::RatesSettings& settings,
                    double T);

void write_report(std::ostream& out, const Report& report);

}  // namespace krf::rates
