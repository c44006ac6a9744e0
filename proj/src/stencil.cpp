#include "krf/stencil.hpp"

#include "krf/error.hpp"

#include <algorithm>
#include <cmath>

namespace krf::stencil {

std::vector<double> fornberg_weights(double x0, std::span<const double> nodes, int deriv) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (deriv < 0 || deriv > n) throw InvalidInput("stencil too small for requested derivative");
  // c[j][k]: weight of node j for derivative k.
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(deriv + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = c[j][deriv];
  return w;
}

UniformDerivative::UniformDerivative(std::size_t n_points, double spacing, int deriv, int accuracy)
    : n_(n_points) {
  const int central = 2 * ((deriv + 1) / 2) - 1 + accuracy;
  const int half = central / 2;
  const int edge = central + 1;
  if (static_cast<int>(n_points) < edge) {
    throw InvalidInput("grid of " + std::to_string(n_points) + " points is too coarse for a " +
                       std::to_string(deriv) + "-th derivative stencil");
  }
  const double scale = std::pow(spacing, -deriv);
  rows_.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    Row row;
    int width = central;
    std::ptrdiff_t first = ii - half;
    if (first < 0 || first + central > static_cast<std::ptrdiff_t>(n_points)) {
      width = edge;
      first = std::clamp<std::ptrdiff_t>(ii - width / 2, 0, static_cast<std::ptrdiff_t>(n_points) - width);
    }
    std::vector<double> offsets(width);
    for (int k = 0; k < width; ++k) offsets[k] = static_cast<double>(first + k - ii);
    row.first = first;
    row.w = fornberg_weights(0.0, offsets, deriv);
    for (auto& w : row.w) w *= scale;
    rows_[i] = std::move(row);
  }
}

double UniformDerivative::at(std::span<const double> f, std::size_t i) const {
  const auto& row = rows_[i];
  double acc = 0.0;
  for (std::size_t k = 0; k < row.w.size(); ++k) acc += row.w[k] * f[row.first + k];
  return acc;
}

void UniformDerivative::apply(std::span<const double> f, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) out[i] = at(f, i);
}

std::vector<double> UniformDerivative::apply(std::span<const double> f) const {
  if (f.size() != n_) throw InvalidInput("derivative operator applied to an array of the wrong size");
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = at(f, i);
  return out;
}

std::vector<double> UniformDerivative::apply_extended(std::span<const double> f) const {
  if (f.size() != n_) throw InvalidInput("derivative operator applied to an array of the wrong size");
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto& row = rows_[i];
    long double acc = 0.0L;
    for (std::size_t k = 0; k < row.w.size(); ++k)
      acc += static_cast<long double>(row.w[k]) * static_cast<long double>(f[row.first + k]);
    out[i] = static_cast<double>(acc);
  }
  return out;
}

double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  std::size_t intervals = n - 1;
  std::size_t simpson_end = (intervals % 2 == 0) ? n - 1 : n - 4;
  double acc = 0.0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) acc += h / 3.0 * (f[i] + 4 * f[i + 1] + f[i + 2]);
  if (intervals % 2 == 1) {
    const std::size_t i = simpson_end;
    acc += 3.0 * h / 8.0 * (f[i] + 3 * f[i + 1] + 3 * f[i + 2] + f[i + 3]);
  }
  return acc;
}

}  // namespace krf::stencil
