/*
 * Copyright 2026 The flee Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace flee {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Principal square root, arg in (-pi, pi]. A negative real axis with a
// signed-zero imaginary part still maps to the upper half-plane.
inline cplx principal_sqrt(cplx z) {
  if (z.imag() == 0.0 && z.real() < 0.0) return {0.0, std::sqrt(-z.real())};
  return std::sqrt(z);
}

// Hermitian and anti-Hermitian (divided by i) parts: M = H + i A.
inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }
inline CMatrix antihermitian_part(const CMatrix& m) { return (m - m.adjoint()) / cplx(0.0, 2.0); }

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double min_hermitian_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline Eigen::VectorXd singular_values(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues();
}

inline cplx lu_determinant(const CMatrix& m) {
  if (m.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<CMatrix>(m).determinant();
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * double(i) / double(n - 1);
  return out;
}

// Complex derivative by a symmetric difference along the real direction.
template <class F>
cplx central_difference(F&& f, cplx z, double h) {
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

}  // namespace flee
