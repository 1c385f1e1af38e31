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

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "flee/error.hpp"
#include "flee/numeric.hpp"

namespace flee {

struct QuadConfig {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  unsigned max_depth = 18;
};

struct QuadResult {
  cplx value;
  double error;
};

// Adaptive Gauss-Kronrod (15/31) on [a, b]; b may be +infinity.
template <class F>
QuadResult gk_integrate(F&& f, double a, double b, const QuadConfig& cfg = {}) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  double l1 = 0.0;
  cplx v = GK::integrate(f, a, b, cfg.max_depth, cfg.rel_tol, &err, &l1);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw Error(ErrorKind::QuadratureNonConvergent, "non-finite integral");
  return {v, err};
}

// Sum of GK integrals over consecutive breakpoints.
template <class F>
QuadResult gk_integrate_panels(F&& f, const std::vector<double>& breaks, const QuadConfig& cfg = {}) {
  QuadResult out{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    auto r = gk_integrate(f, breaks[i], breaks[i + 1], cfg);
    out.value += r.value;
    out.error += r.error;
  }
  return out;
}

// Fixed-order Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

inline GaussLegendre gauss_legendre_10() {
  using G = boost::math::quadrature::gauss<double, 10>;
  GaussLegendre gl;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (ab[i] == 0.0) {
      gl.x.push_back(0.0);
      gl.w.push_back(wt[i]);
      continue;
    }
    gl.x.push_back(-ab[i]);
    gl.w.push_back(wt[i]);
    gl.x.push_back(ab[i]);
    gl.w.push_back(wt[i]);
  }
  return gl;
}

}  // namespace flee
