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

// Independent closed forms and reference routines. Nothing here calls the library solvers.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline const cplx I(0.0, 1.0);

// omega = k^2, flat coupling g: Sigma_D(z) = i g^2 e^{i q D} / (2 q), q = sqrt(z) (principal).
// Valid on the first sheet for Im z > 0 and on the continuation through the positive real axis.
inline cplx massless_sigma(double g, double D, cplx z) {
  cplx q = std::sqrt(z);
  return I * g * g * std::exp(I * q * D) / (2.0 * q);
}

// omega = sqrt(k^2 + m^2), G = gamma / (2 pi omega), D = 0, real E in (-m, m).
inline double waveguide_sigma_below(double m, double gamma, double E) {
  return gamma / pi * (pi / 2.0 + std::asin(E / m)) / std::sqrt(m * m - E * E);
}

// Imaginary part of Sigma_D(E + i0) above threshold: gamma cos(k D) / k, k = sqrt(E^2 - m^2).
inline double waveguide_im_sigma_above(double m, double gamma, double D, double E) {
  double k = std::sqrt(E * E - m * m);
  return gamma * std::cos(k * D) / k;
}

// Scalar Newton with a numerical derivative.
inline cplx newton(const std::function<cplx(cplx)>& f, cplx z, int iters = 100) {
  for (int i = 0; i < iters; ++i) {
    double h = 1e-7 * (1.0 + std::abs(z));
    cplx d = (f(z + h) - f(z - h)) / (2.0 * h);
    cplx step = f(z) / d;
    z -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

// Massless n = 1 characteristic function z - eps + Sigma(z).
inline cplx massless_char(double g, double eps, cplx z) { return z - eps + massless_sigma(g, 0.0, z); }

// Bound state below zero by bisection on E - eps + g^2 / (2 sqrt(-E)).
inline double massless_bound_state(double g, double eps) {
  auto f = [&](double E) { return E - eps + g * g / (2.0 * std::sqrt(-E)); };
  double lo = -eps - 10.0 - g * g, hi = -1e-300;
  for (int i = 0; i < 2000 && hi - lo > 1e-17 * std::abs(lo); ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Determinant by cofactor expansion along the first row.
inline cplx det(const std::vector<std::vector<cplx>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  cplx s = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<cplx>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<cplx> row;
      for (std::size_t q = 0; q < n; ++q)
        if (q != c) row.push_back(a[r][q]);
      minor.push_back(row);
    }
    s += (c % 2 ? -1.0 : 1.0) * a[0][c] * det(minor);
  }
  return s;
}

// Phase matrix entries e^{i kappa |x_j - x_l|}.
inline std::vector<std::vector<cplx>> phase(const std::vector<double>& x, cplx kappa, cplx shift = 0.0) {
  std::vector<std::vector<cplx>> a(x.size(), std::vector<cplx>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t l = 0; l < x.size(); ++l) a[j][l] = std::exp(I * kappa * std::abs(x[j] - x[l])) - (j == l ? shift : 0.0);
  return a;
}

// Richardson ratio e(h) / e(h/2) between successive errors.
inline std::vector<double> ratios(const std::vector<double>& errs) {
  std::vector<double> r;
  for (std::size_t i = 1; i < errs.size(); ++i) r.push_back(errs[i - 1] / errs[i]);
  return r;
}

}  // namespace oracle
