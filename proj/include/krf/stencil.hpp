#pragma once

#include <span>
#include <vector>

namespace krf::stencil {

/// Finite-difference weights for the `deriv`-th derivative at x0 from values at
/// `nodes` (Fornberg's recursion). Works for arbitrary, unevenly spaced nodes.
std::vector<double> fornberg_weights(double x0, std::span<const double> nodes, int deriv);

/// Derivative operator on a uniform grid: central stencils in the interior,
/// shifted one-sided stencils (one point wider) near the ends so the formal
/// accuracy never drops below `accuracy`.
class UniformDerivative {
 public:
  UniformDerivative(std::size_t n_points, double spacing, int deriv, int accuracy);

  std::vector<double> apply(std::span<const double> f) const;
  void apply(std::span<const double> f, std::span<double> out) const;
  double at(std::span<const double> f, std::size_t i) const;
  /// Same stencils, sums accumulated in extended precision.
  std::vector<double> apply_extended(std::span<const double> f) const;

  std::size_t size() const { return n_; }

 private:
  struct Row {
    std::ptrdiff_t first = 0;
    std::vector<double> w;
  };
  std::size_t n_;
  std::vector<Row> rows_;
};

/// Composite Simpson on a uniform grid; an odd number of intervals closes with the 3/8 rule.
double simpson(std::span<const double> f, double h);

}  // namespace krf::stencil
