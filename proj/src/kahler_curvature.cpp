#include "krf/kahler_curvature.hpp"

#include <array>
#include <complex>
#include <vector>

namespace krf::curvature {

namespace {

// Sixth-order central stencils on the offsets -3..3 (the centre is handled separately).
constexpr std::array<int, 6> kOffsets{-3, -2, -1, 1, 2, 3};
constexpr std::array<Real, 6> kFirst{-1.0L / 60, 9.0L / 60, -45.0L / 60, 45.0L / 60, -9.0L / 60, 1.0L / 60};
constexpr std::array<Real, 6> kSecond{2.0L / 180, -27.0L / 180, 270.0L / 180, 270.0L / 180, -27.0L / 180, 2.0L / 180};
constexpr Real kSecondCentre = -490.0L / 180;

// Real coordinate alpha: 2k -> Re z_k, 2k+1 -> Im z_k.
CVector shifted(const CVector& z, int alpha, Real amount) {
  CVector w = z;
  const int k = alpha / 2;
  w(k) += (alpha % 2 == 0) ? Complex(amount, 0.0L) : Complex(0.0L, amount);
  return w;
}

}  // namespace

CurvaturePoint evaluate(const MetricField& metric, const CVector& z0, Real step) {
  const int n = static_cast<int>(z0.size());
  const int dims = 2 * n;
  const CMatrix g0 = metric(z0);

  // First and second real derivatives of the matrix field.
  std::vector<CMatrix> d1(dims, CMatrix::Zero(n, n));
  std::vector<std::vector<CMatrix>> d2(dims, std::vector<CMatrix>(dims, CMatrix::Zero(n, n)));
  for (int a = 0; a < dims; ++a) {
    d2[a][a] = kSecondCentre * g0;
    for (std::size_t s = 0; s < kOffsets.size(); ++s) {
      const CMatrix sample = metric(shifted(z0, a, kOffsets[s] * step));
      d1[a] += kFirst[s] * sample;
      d2[a][a] += kSecond[s] * sample;
    }
    d1[a] /= step;
    d2[a][a] /= step * step;
  }
  for (int a = 0; a < dims; ++a) {
    for (int b = a + 1; b < dims; ++b) {
      CMatrix acc = CMatrix::Zero(n, n);
      for (std::size_t s = 0; s < kOffsets.size(); ++s) {
        const CVector za = shifted(z0, a, kOffsets[s] * step);
        for (std::size_t r = 0; r < kOffsets.size(); ++r)
          acc += (kFirst[s] * kFirst[r]) * metric(shifted(za, b, kOffsets[r] * step));
      }
      acc /= step * step;
      d2[a][b] = acc;
      d2[b][a] = acc;
    }
  }

  const Complex I(0.0L, 1.0L);
  std::vector<CMatrix> dk(n), dbar(n);
  for (int k = 0; k < n; ++k) {
    dk[k] = Real(0.5) * (d1[2 * k] - I * d1[2 * k + 1]);
    dbar[k] = Real(0.5) * (d1[2 * k] + I * d1[2 * k + 1]);
  }
  const CMatrix ginv = g0.inverse();

  // R[k][l](i, j) = R_{i jbar k lbar}
  std::vector<std::vector<CMatrix>> R(n, std::vector<CMatrix>(n));
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const int xk = 2 * k, yk = 2 * k + 1, xl = 2 * l, yl = 2 * l + 1;
      const CMatrix ddbar = Real(0.25) * (d2[xk][xl] + d2[yk][yl] + I * (d2[xk][yl] - d2[yk][xl]));
      R[k][l] = -ddbar + dk[k] * ginv * dbar[l];
    }
  }

  CurvaturePoint out;
  Complex scalar = 0.0L;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) scalar += ginv(j, i) * ginv(l, k) * R[k][l](i, j);
  out.scalar = static_cast<double>(scalar.real());

  // Orthonormal frame: g = L L^*, frame matrix M = L^{-1}.
  Eigen::LLT<CMatrix> llt(g0);
  const CMatrix L = llt.matrixL();
  const CMatrix M = L.inverse();
  Real norm2 = 0.0L;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Complex v = 0.0L;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                  v += M(a, i) * std::conj(M(b, j)) * M(c, k) * std::conj(M(d, l)) * R[k][l](i, j);
          norm2 += std::norm(v);
        }
  out.norm = static_cast<double>(std::sqrt(norm2));

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(g0);
  const auto& ev = eig.eigenvalues();
  out.condition = static_cast<double>(ev.maxCoeff() / ev.minCoeff());
  return out;
}

}  // namespace krf::curvature
