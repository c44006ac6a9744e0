#pragma once

// Curvature of a Kähler metric given only as a field of Hermitian matrices
// g_{i jbar}(z) on a coordinate patch of C^n. Derivatives are sixth-order
// central differences in the real coordinates (x_k, y_k); nothing about the
// symmetry of the metric is assumed.

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace krf::curvature {

// Extended precision: second differences of an anisotropic metric lose
// roughly cond(g)^2 / step^2 ulps.
using Real = long double;
using Complex = std::complex<Real>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using MetricField = std::function<CMatrix(const CVector& z)>;

struct CurvaturePoint {
  double norm = 0.0;       // |Rm| in the Hermitian norm induced by g
  double scalar = 0.0;     // g^{i jbar} g^{k lbar} R_{i jbar k lbar}
  double condition = 1.0;  // eigenvalue ratio of g at the point
};

/// `step` is the real-coordinate finite-difference step.
CurvaturePoint evaluate(const MetricField& metric, const CVector& z0, Real step);

}  // namespace krf::curvature
