#include "krf/rates.hpp"

#include "krf/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace krf::rates {

namespace {

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(digits) << v;
  return os.str();
}

bool within(double t, const Window& w) { return t >= w.t_lo && t <= w.t_hi; }

}  // namespace

RateFit fit_power_law(std::span<const double> t, std::span<const double> value, double T, Window window) {
  if (t.size() != value.size()) throw InvalidInput("fit: time and value series differ in length");
  if (!(window.t_lo < window.t_hi) || !(window.t_hi < T)) throw InvalidInput("fit window must lie inside (0, T)");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!within(t[i], window)) continue;
    if (!(value[i] > 0))
      throw FitError("nonpositive value " + fmt(value[i]) + " at sample " + std::to_string(i) + " (t = " +
                     fmt(t[i], 10) + ")");
    xs.push_back(std::log(T - t[i]));
    ys.push_back(std::log(value[i]));
  }
  if (xs.size() < kMinFitPoints)
    throw FitError("insufficient data: " + std::to_string(xs.size()) + " samples in window [" +
                   fmt(window.t_lo, 10) + ", " + fmt(window.t_hi, 10) + "], need " +
                   std::to_string(kMinFitPoints));
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw FitError("all samples in the window share one value of T - t");
  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  fit.window = window;
  fit.n_points = xs.size();
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.exponent * xs[i];
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.exponent_stderr = std::sqrt(ss / std::max(n - 2, 1.0) / sxx);
  return fit;
}

Window last_decades(double T, double t_end, double decades) {
  if (!(t_end < T)) throw InvalidInput("window end must precede T");
  return {T - (T - t_end) * std::pow(10.0, decades), t_end};
}

std::vector<Window> approaching_windows(double T, double t_end, double decades, double shift, std::size_t count) {
  std::vector<Window> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double offset = shift * static_cast<double>(count - 1 - k);
    const double s_hi = (T - t_end) * std::pow(10.0, offset + decades);
    const double s_lo = (T - t_end) * std::pow(10.0, offset);
    out.push_back({T - s_hi, T - s_lo});
  }
  return out;
}

Stability windowed_stability(std::span<const double> t, std::span<const double> value, double T,
                             std::span<const Window> windows) {
  Stability s;
  for (const auto& w : windows) {
    s.fits.push_back(fit_power_law(t, value, T, w));
    if (s.fits.size() > 1)
      s.drift.push_back(std::abs(s.fits.back().exponent - s.fits[s.fits.size() - 2].exponent));
  }
  return s;
}

// ---------------------------------------------------------------------------

std::size_t Table::index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw SchemaError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t k = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Table read_csv(std::istream& in, const std::string& origin, const std::vector<std::string>& expected) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(origin + ": empty file, expected a header row");
  t.columns = split(line);
  if (!expected.empty()) {
    for (std::size_t i = 0; i < std::max(expected.size(), t.columns.size()); ++i) {
      if (i >= t.columns.size())
        throw SchemaError(origin + ": missing column " + std::to_string(i + 1) + " '" + expected[i] + "'");
      if (i >= expected.size())
        throw SchemaError(origin + ": unexpected column " + std::to_string(i + 1) + " '" + t.columns[i] + "'");
      if (t.columns[i] != expected[i])
        throw SchemaError(origin + ": column " + std::to_string(i + 1) + " is '" + t.columns[i] + "', expected '" +
                          expected[i] + "'");
    }
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw SchemaError(origin + ":" + std::to_string(lineno) + ": " + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(t.columns.size()));
    std::vector<double> row(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto& c = cells[k];
      const auto res = std::from_chars(c.data(), c.data() + c.size(), row[k]);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size())
        throw SchemaError(origin + ":" + std::to_string(lineno) + ": column '" + t.columns[k] +
                          "' holds non-numeric value '" + c + "'");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::size_t early_count(std::span<const double> t, double T) {
  if (t.empty()) return 0;
  const double first = std::log(T - t.front()), last = std::log(T - t.back());
  const double cut = first - 0.1 * (first - last);
  std::size_t k = 0;
  while (k < t.size() && std::log(T - t[k]) >= cut) ++k;
  return std::max<std::size_t>(k, 1);
}

namespace {

BoundednessVerdict bounded_verdict(const std::string& name, const std::vector<double>& v, std::size_t early,
                                   double factor, bool logarithmic) {
  BoundednessVerdict b;
  b.quantity = name;
  b.run_max = *std::max_element(v.begin(), v.end());
  b.early_max = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(early));
  b.limit = logarithmic ? b.early_max + std::log(factor) : factor * b.early_max;
  b.pass = std::isfinite(b.run_max) && b.run_max <= b.limit;
  return b;
}

RateVerdict rate_verdict(const config::Expectation& e, const std::vector<double>& t, const std::vector<double>& v,
                         double T, double decades) {
  RateVerdict r;
  r.quantity = e.quantity;
  r.expected = e;
  try {
    if (t.empty()) throw FitError("no records to fit");
    r.fit = fit_power_law(t, v, T, last_decades(T, t.back(), decades));
    r.pass = e.lower_bound_only ? r.fit->exponent >= e.exponent - e.tolerance
                                : std::abs(r.fit->exponent - e.exponent) <= e.tolerance;
  } catch (const Error& ex) {
    r.error = ex.what();
  }
  return r;
}

}  // namespace

Report build_report(const Table& trajectory, const Table* diagnostics, const config::RatesSettings& settings,
                    double T) {
  Report rep;
  rep.T = T;
  const auto t = trajectory.column("t");
  const auto ok = trajectory.column("hypothesis_ok");
  rep.records = t.size();
  if (t.empty()) throw SchemaError("trajectory has no records");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw SchemaError("trajectory times are not strictly increasing at row " + std::to_string(i + 2));
  if (!(t.back() < T)) throw SchemaError("trajectory reaches the singular time");

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (ok[i] != 0) keep.push_back(i);
    else if (!rep.first_violation) rep.first_violation = t[i];
  }
  rep.fitted_records = keep.size();

  for (const auto& e : settings.expectations) {
    const auto v = trajectory.column(e.quantity);
    std::vector<double> tk, vk;
    for (std::size_t i : keep) {
      tk.push_back(t[i]);
      vk.push_back(v[i]);
    }
    rep.rates.push_back(rate_verdict(e, tk, vk, T, settings.window_decades));
    if (rep.first_violation) rep.rates_violated.push_back(rate_verdict(e, t, v, T, settings.window_decades));
  }

  const std::size_t early = early_count(t, T);
  for (const auto& name : settings.bounded) {
    if (name == "equivalence") {
      if (!diagnostics) {
        BoundednessVerdict b;
        b.quantity = "equivalence";
        b.error = "diagnostics table not available";
        rep.bounded.push_back(b);
        continue;
      }
      const auto dt = diagnostics->column("t");
      if (dt != t) throw SchemaError("diagnostics rows do not match the trajectory times");
      auto inv_low = diagnostics->column("c_low");
      for (auto& x : inv_low) x = 1.0 / x;
      rep.bounded.push_back(bounded_verdict("c_high", diagnostics->column("c_high"), early,
                                            settings.bounded_factor, false));
      rep.bounded.push_back(bounded_verdict("1/c_low", inv_low, early, settings.bounded_factor, false));
      continue;
    }
    rep.bounded.push_back(bounded_verdict(name, trajectory.column(name), early, settings.bounded_factor,
                                          name.rfind("Q_", 0) == 0));
  }

  rep.pass = true;
  for (const auto& r : rep.rates) rep.pass = rep.pass && r.pass;
  for (const auto& b : rep.bounded) rep.pass = rep.pass && b.pass;
  return rep;
}

namespace {

void write_rate(std::ostream& out, const char* tag, const RateVerdict& r) {
  out << tag << ' ' << r.quantity;
  if (r.fit) {
    out << " window=[" << fmt(r.fit->window.t_lo, 10) << ", " << fmt(r.fit->window.t_hi, 10) << "] n="
        << r.fit->n_points << " exponent=" << fmt(r.fit->exponent) << " stderr=" << fmt(r.fit->exponent_stderr, 3)
        << " residual=" << fmt(r.fit->residual_rms, 3);
  } else {
    out << " error=\"" << r.error << '"';
  }
  out << " expected" << (r.expected.lower_bound_only ? ">=" : "=") << fmt(r.expected.exponent)
      << (r.expected.lower_bound_only ? "-" : "+-") << fmt(r.expected.tolerance);
  out << ' ' << (r.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace

void write_report(std::ostream& out, const Report& rep) {
  out << "T=" << fmt(rep.T, 17) << " records=" << rep.records << " fitted=" << rep.fitted_records
      << " ricci_hypothesis=";
  if (rep.first_violation)
    out << "violated_from_t=" << fmt(*rep.first_violation, 10) << '\n';
  else
    out << "ok\n";
  for (const auto& r : rep.rates) write_rate(out, "rate", r);
  for (const auto& r : rep.rates_violated) write_rate(out, "rate_all_records", r);
  for (const auto& b : rep.bounded) {
    out << "bounded " << b.quantity;
    if (!b.error.empty())
      out << " error=\"" << b.error << "\" FAIL\n";
    else
      out << " run_max=" << fmt(b.run_max) << " early_max=" << fmt(b.early_max) << " limit=" << fmt(b.limit)
          << ' ' << (b.pass ? "PASS" : "FAIL") << '\n';
  }
  out << "overall " << (rep.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace krf::rates
