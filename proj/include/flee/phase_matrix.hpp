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

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "flee/error.hpp"
#include "flee/numeric.hpp"
#include "flee/parallel.hpp"

namespace flee {

inline CMatrix phase_matrix(const std::vector<double>& x, cplx kappa) {
  const std::size_t n = x.size();
  CMatrix m(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    m(j, j) = 1.0;
    for (std::size_t l = 0; l < j; ++l) {
      cplx v = std::exp(I * kappa * std::abs(x[j] - x[l]));
      m(j, l) = v;
      m(l, j) = v;
    }
  }
  return m;
}

struct CharPolyEvaluation {
  cplx lambda;
  cplx kappa;
  cplx value;
  std::vector<cplx> sequence;  // p_1, ..., p_n
  cplx derivative;             // d p_n / d lambda
};

// p_1 = 1 - l, p_2 = (1 - l)^2 - e_2,
// p_n = [(1 - l) - (1 + l) e_n] p_{n-1} - l^2 e_n p_{n-2}, e_n = e^{2 i k (x_n - x_{n-1})}.
inline CharPolyEvaluation char_poly(const std::vector<double>& x, cplx lambda, cplx kappa) {
  if (x.empty()) throw Error(ErrorKind::InvalidParam, "char_poly needs n >= 1");
  CharPolyEvaluation r{lambda, kappa, 0.0, {}, 0.0};
  const std::size_t n = x.size();
  cplx pm2 = 0.0, dm2 = 0.0;
  cplx pm1 = 1.0 - lambda, dm1 = -1.0;
  r.sequence.push_back(pm1);
  if (n >= 2) {
    cplx e = std::exp(2.0 * I * kappa * (x[1] - x[0]));
    cplx p2 = (1.0 - lambda) * (1.0 - lambda) - e;
    cplx d2 = -2.0 * (1.0 - lambda);
    pm2 = pm1;
    dm2 = dm1;
    pm1 = p2;
    dm1 = d2;
    r.sequence.push_back(p2);
  }
  for (std::size_t j = 2; j < n; ++j) {
    cplx e = std::exp(2.0 * I * kappa * (x[j] - x[j - 1]));
    cplx a = (1.0 - lambda) - (1.0 + lambda) * e;
    cplx b = lambda * lambda * e;
    cplx p = a * pm1 - b * pm2;
    cplx d = (-1.0 - e) * pm1 + a * dm1 - 2.0 * lambda * e * pm2 - b * dm2;
    pm2 = pm1;
    dm2 = dm1;
    pm1 = p;
    dm1 = d;
    r.sequence.push_back(p);
  }
  r.value = pm1;
  r.derivative = dm1;
  return r;
}

// det Phi_n = prod_j [1 - e^{2 i k (x_{j+1} - x_j)}].
inline cplx det_closed(const std::vector<double>& x, cplx kappa) {
  cplx p = 1.0;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) p *= 1.0 - std::exp(2.0 * I * kappa * (x[j + 1] - x[j]));
  return p;
}

struct PhaseSpectrum {
  std::vector<cplx> eigenvalues;
  std::vector<int> multiplicity;  // cluster size each eigenvalue belongs to
  CMatrix eigenvectors;           // columns, when requested
  std::vector<double> residuals;  // smallest singular value of Phi - lambda I
};

struct EigenOptions {
  int max_iter = 500;
  double cluster_tol = 1e-7;
  double residual_tol = 1e-8;
};

inline PhaseSpectrum eigenvalues(const std::vector<double>& x, cplx kappa, bool want_vectors = false,
                                 const EigenOptions& opt = {}) {
  const std::size_t n = x.size();
  PhaseSpectrum out;
  CMatrix phi = phase_matrix(x, kappa);
  double R = 1.0 + phi.cwiseAbs().rowwise().sum().maxCoeff();
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::polar(R, 2.0 * pi * double(i) / double(n) + 0.4);
  if (n == 1) z[0] = 1.0;

  // Aberth-Ehrlich iteration on the recurrence.
  for (int it = 0; it < opt.max_iter && n > 1; ++it) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto cp = char_poly(x, z[i], kappa);
      if (cp.value == 0.0) continue;
      cplx w = cp.value / cp.derivative;
      cplx s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) s += 1.0 / (z[i] - z[j]);
      cplx step = w / (1.0 - w * s);
      if (!std::isfinite(std::abs(step))) continue;
      z[i] -= step;
      worst = std::max(worst, std::abs(step));
    }
    if (worst <= 1e-15 * R) break;
  }

  // Clusters: replace by their mean and refine with multiplicity-aware Newton.
  std::vector<int> cluster(n, -1);
  int nc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = nc;
    for (std::size_t j = i + 1; j < n; ++j)
      if (cluster[j] < 0 && std::abs(z[i] - z[j]) < opt.cluster_tol * R) cluster[j] = nc;
    ++nc;
  }
  std::vector<cplx> vals(n);
  std::vector<int> mult(n);
  for (int c = 0; c < nc; ++c) {
    cplx mean = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (cluster[i] == c) {
        mean += z[i];
        ++m;
      }
    mean /= double(m);
    if (m > 1) {
      for (int it = 0; it < 8; ++it) {
        auto cp = char_poly(x, mean, kappa);
        if (cp.derivative == 0.0) break;
        cplx step = double(m) * cp.value / cp.derivative;
        if (!std::isfinite(std::abs(step)) || std::abs(step) > opt.cluster_tol * R) break;
        mean -= step;
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (cluster[i] == c) {
        vals[i] = mean;
        mult[i] = m;
      }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return vals[a].real() != vals[b].real() ? vals[a].real() < vals[b].real() : vals[a].imag() < vals[b].imag();
  });
  if (want_vectors) out.eigenvectors = CMatrix::Zero(n, n);
  const double scale = 1.0 + phi.norm();
  std::size_t col = 0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t i = order[idx];
    out.eigenvalues.push_back(vals[i]);
    out.multiplicity.push_back(mult[i]);
    Eigen::JacobiSVD<CMatrix> svd(phi - vals[i] * CMatrix::Identity(n, n), Eigen::ComputeFullV);
    double res = svd.singularValues()(n - 1);
    out.residuals.push_back(res);
    if (res > opt.residual_tol * scale)
      throw Error(ErrorKind::RootFindingStall, "eigenvalue residual above tolerance");
    if (want_vectors) {
      // The k-th member of a cluster takes the k-th smallest singular direction.
      std::size_t first = idx;
      while (first > 0 && std::abs(vals[order[first - 1]] - vals[i]) == 0.0) --first;
      std::size_t rank_in_cluster = idx - first;
      out.eigenvectors.col(col++) = svd.matrixV().col(n - 1 - rank_in_cluster);
    }
  }
  return out;
}

inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> cosine_sine_split(const std::vector<double>& x, double k,
                                                                     double eta) {
  const std::size_t n = x.size();
  Eigen::MatrixXd C(n, n), S(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      double d = x[j] - x[l];
      double damp = std::exp(-eta * std::abs(d));
      C(j, l) = damp * std::cos(k * d);
      S(j, l) = damp * std::sin(k * std::abs(d));
    }
  return {C, S};
}

// Eigenvalues of -i Phi_n(k + i eta).
inline std::vector<cplx> rotated_eigenvalues(const std::vector<double>& x, double k, double eta) {
  auto sp = eigenvalues(x, cplx(k, eta));
  for (auto& v : sp.eigenvalues) v *= -I;
  return sp.eigenvalues;
}

struct Trajectory {
  std::vector<double> k;
  std::vector<std::vector<cplx>> branches;  // branches[i][b] at k[i]
  std::vector<bool> ambiguous;
};

namespace detail {

// Greedy nearest-neighbour assignment; returns permutation and ambiguity flag.
inline std::pair<std::vector<cplx>, bool> match(const std::vector<cplx>& prev, const std::vector<cplx>& next,
                                                double tol) {
  const std::size_t n = prev.size();
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) pairs.emplace_back(std::abs(prev[a] - next[b]), a, b);
  std::sort(pairs.begin(), pairs.end());
  std::vector<cplx> out(n);
  std::vector<bool> ua(n, false), ub(n, false);
  for (auto& [d, a, b] : pairs) {
    if (ua[a] || ub[b]) continue;
    ua[a] = ub[b] = true;
    out[a] = next[b];
  }
  bool amb = false;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<double> d;
    for (std::size_t b = 0; b < n; ++b) d.push_back(std::abs(prev[a] - next[b]));
    std::sort(d.begin(), d.end());
    if (n > 1 && d[1] - d[0] < 2.0 * tol) amb = true;
  }
  return {out, amb};
}

}  // namespace detail

inline double multiset_distance(std::vector<cplx> a, const std::vector<cplx>& b) {
  auto [m, amb] = detail::match(a, b, 0.0);
  (void)amb;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - m[i]));
  return d;
}

inline Trajectory trajectory_sweep(const std::vector<double>& x, double k0, double k1, double step, double eta,
                                   double match_tol = 1e-9, int max_refine = 4) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidParam, "step must be positive");
  if (k1 < k0) throw Error(ErrorKind::InvalidParam, "empty k range");
  std::size_t count = std::size_t(std::floor((k1 - k0) / step + 1e-9)) + 1;
  Trajectory t;
  t.k.resize(count);
  std::vector<std::vector<cplx>> raw(count);
  parallel_for(count, [&](std::size_t i) {
    t.k[i] = k0 + step * double(i);
    raw[i] = rotated_eigenvalues(x, t.k[i], eta);
  });
  t.branches.resize(count);
  t.ambiguous.assign(count, false);
  t.branches[0] = raw[0];
  for (std::size_t i = 1; i < count; ++i) {
    auto [m, amb] = detail::match(t.branches[i - 1], raw[i], match_tol);
    if (amb) {
      // Walk through intermediate points to follow close branches.
      std::vector<cplx> cur = t.branches[i - 1];
      int sub = 1 << max_refine;
      bool still = false;
      for (int s = 1; s <= sub; ++s) {
        double kk = t.k[i - 1] + step * double(s) / double(sub);
        auto ev = s == sub ? raw[i] : rotated_eigenvalues(x, kk, eta);
        auto [mm, a2] = detail::match(cur, ev, match_tol);
        cur = mm;
        still = still || a2;
      }
      m = cur;
      amb = still;
    }
    t.branches[i] = m;
    t.ambiguous[i] = amb;
  }
  return t;
}

// Common measure g of the gaps, when every gap ratio is rational with
// denominator <= qmax; the eigenvalues of Phi are then pi/g periodic in k.
inline std::optional<double> rational_gcd(const std::vector<double>& gaps, long qmax = 1000, double tol = 1e-10) {
  std::vector<double> g;
  for (double v : gaps)
    if (v > 0.0) g.push_back(v);
  if (g.empty()) return std::nullopt;
  const double g0 = g[0];
  long L = 1;
  std::vector<std::pair<long, long>> frac;
  for (double v : g) {
    double r = v / g0;
    // Continued fraction convergents.
    long h0 = 1, h1 = long(std::floor(r)), k0 = 0, k1 = 1;
    double rem = r - std::floor(r);
    bool found = std::abs(r - double(h1)) <= tol * r;
    while (!found) {
      if (rem == 0.0) break;
      double inv = 1.0 / rem;
      long a = long(std::floor(inv));
      rem = inv - double(a);
      long h2 = a * h1 + h0, k2 = a * k1 + k0;
      if (k2 > qmax) break;
      h0 = h1;
      h1 = h2;
      k0 = k1;
      k1 = k2;
      found = std::abs(r - double(h1) / double(k1)) <= tol * r;
    }
    if (!found) return std::nullopt;
    frac.emplace_back(h1, k1);
    L = std::lcm(L, k1);
    if (L > qmax * qmax) return std::nullopt;
  }
  long G = L;
  for (auto [p, q] : frac) G = std::gcd(G, p * (L / q));
  return g0 * double(G) / double(L);
}

inline std::optional<double> trajectory_period(const std::vector<double>& x) {
  std::vector<double> gaps;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) gaps.push_back(x[j + 1] - x[j]);
  auto g = rational_gcd(gaps);
  if (!g) return std::nullopt;
  return pi / *g;
}

// Largest multiset distance between eigenvalues at k and k + P over samples.
inline double closure_defect(const std::vector<double>& x, double P, const std::vector<double>& ks, double eta = 0.0) {
  double worst = 0.0;
  for (double k : ks) worst = std::max(worst, multiset_distance(rotated_eigenvalues(x, k, eta), rotated_eigenvalues(x, k + P, eta)));
  return worst;
}

}  // namespace flee
