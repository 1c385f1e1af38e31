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
#include <optional>
#include <vector>

#include "flee/phase_matrix.hpp"
#include "flee/self_energy.hpp"

namespace flee {

enum class CharKind { BoundState, Resonance };

inline const char* to_string(CharKind k) { return k == CharKind::BoundState ? "BoundState" : "Resonance"; }

// Full keeps every term; DiagonalOnly keeps Delta but drops B; Neglect drops both.
enum class Corrections { Full, DiagonalOnly, Neglect };

struct CharacteristicValue {
  cplx z;
  CharKind kind = CharKind::BoundState;
  CVector amplitude;
  CMatrix nullspace;  // one column per degenerate direction
  double residual = 0.0;
  int degeneracy = 0;
  Eigen::VectorXd singular_values;
  cplx det = 0.0;
};

struct NearMiss {
  double E;
  double sigma_min;
};

struct BoundStateResult {
  std::vector<CharacteristicValue> states;
  std::vector<NearMiss> near_misses;
};

struct ResonanceResult {
  std::vector<CharacteristicValue> roots;
  std::vector<std::pair<cplx, std::string>> failures;  // seed, reason
};

struct SpectralOptions {
  Corrections corrections = Corrections::Full;
  double accept = 1e-8;        // singular-value threshold, relative to matrix scale
  double degeneracy = 1e-7;    // relative threshold for counting degenerate directions
  SolveOptions solve;
  ContourConfig contour;
};

// Sigma(E + i0) with the requested correction terms.
inline CMatrix boundary_sigma(const Model& model, double E, Corrections mode, const SolveOptions& so = {},
                              const ContourConfig& cc = {}) {
  auto s = sigma_boundary(model, E, Side::Above, so, cc);
  if (mode == Corrections::Full) return s.matrix;
  CMatrix m = CMatrix::Zero(model.n(), model.n());
  CMatrix rest = s.contour;
  for (const auto& p : s.poles) {
    if (p.family == Family::Zero) m += p.contribution;
    else rest += p.contribution;
  }
  if (mode == Corrections::DiagonalOnly) m += rest(0, 0) * CMatrix::Identity(model.n(), model.n());
  return m;
}

inline CMatrix characteristic_matrix(const Model& model, cplx z, bool continuation = false,
                                     Corrections mode = Corrections::Full, const SolveOptions& so = {},
                                     const ContourConfig& cc = {}) {
  const auto n = model.n();
  CMatrix sigma;
  if (std::abs(z.imag()) <= so.real_tol && mode != Corrections::Full)
    sigma = boundary_sigma(model, z.real(), mode, so, cc);
  else if (continuation && z.imag() < 0)
    sigma = sigma_continuation(model, z, so, cc).matrix;
  else if (std::abs(z.imag()) <= so.real_tol)
    sigma = sigma_boundary(model, z.real(), Side::Above, so, cc).matrix;
  else
    sigma = sigma_decomposed(model, z, so, cc).matrix;
  return model.epsilon_matrix() - z * CMatrix::Identity(n, n) - sigma;
}

inline cplx characteristic_det(const Model& model, cplx z, bool continuation = false,
                               Corrections mode = Corrections::Full, const SolveOptions& so = {}) {
  return lu_determinant(characteristic_matrix(model, z, continuation, mode, so));
}

inline CharacteristicValue characterize(const CMatrix& m, cplx z, double threshold) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const auto n = m.rows();
  CharacteristicValue cv;
  cv.z = z;
  cv.kind = std::abs(z.imag()) <= 1e-9 ? CharKind::BoundState : CharKind::Resonance;
  cv.singular_values = svd.singularValues();
  cv.residual = cv.singular_values(n - 1);
  cv.amplitude = svd.matrixV().col(n - 1);
  // Fix the phase so the largest component is real and positive.
  Eigen::Index big = 0;
  cv.amplitude.cwiseAbs().maxCoeff(&big);
  cv.amplitude *= std::abs(cv.amplitude(big)) / cv.amplitude(big);
  int deg = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (cv.singular_values(i) < threshold) ++deg;
  cv.degeneracy = std::max(deg, 1);
  cv.nullspace = svd.matrixV().rightCols(cv.degeneracy);
  cv.det = lu_determinant(m);
  return cv;
}

inline BoundStateResult bound_states(const Model& model, double E_lo, double E_hi, std::size_t grid = 400,
                                     const SpectralOptions& opt = {}) {
  if (!(E_hi > E_lo)) throw Error(ErrorKind::InvalidParam, "empty energy range");
  BoundStateResult res;
  const double escale = model.energy_scale();
  auto crit = model.critical_values();
  auto usable = [&](double E) {
    for (double c : crit)
      if (std::abs(E - c) < 10.0 * opt.solve.collision_tol * escale) return false;
    return true;
  };
  auto smin = [&](double E) {
    CMatrix m = characteristic_matrix(model, E, false, opt.corrections, opt.solve, opt.contour);
    return singular_values(m).minCoeff();
  };
  auto Es = linspace(E_lo, E_hi, grid);
  std::vector<double> sv(grid, std::numeric_limits<double>::infinity());
  parallel_for(grid, [&](std::size_t i) {
    if (usable(Es[i])) sv[i] = smin(Es[i]);
  });
  for (std::size_t i = 0; i < grid; ++i) {
    if (!std::isfinite(sv[i])) continue;
    double left = i > 0 ? sv[i - 1] : std::numeric_limits<double>::infinity();
    double right = i + 1 < grid ? sv[i + 1] : std::numeric_limits<double>::infinity();
    if (!(sv[i] <= left && sv[i] < right)) continue;
    // Golden-section search on the V-shaped smallest singular value.
    double a = i > 0 ? Es[i - 1] : Es[i];
    double b = i + 1 < grid ? Es[i + 1] : Es[i];
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = usable(c) ? smin(c) : 1e300, fd = usable(d) ? smin(d) : 1e300;
    for (int it = 0; it < 200 && (b - a) > 4e-16 * std::max(1.0, std::abs(a)); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = usable(c) ? smin(c) : 1e300;
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = usable(d) ? smin(d) : 1e300;
      }
    }
    double E = fc < fd ? c : d;
    if (!usable(E)) continue;
    CMatrix m = characteristic_matrix(model, E, false, opt.corrections, opt.solve, opt.contour);
    double scale = std::max(1.0, max_abs(m));
    auto cv = characterize(m, E, opt.degeneracy * scale);
    if (cv.residual < opt.accept * scale) {
      bool dup = std::any_of(res.states.begin(), res.states.end(),
                             [&](const CharacteristicValue& o) { return std::abs(o.z - cv.z) < 1e-9 * escale; });
      if (!dup) res.states.push_back(cv);
    } else {
      res.near_misses.push_back({E, cv.residual});
    }
  }
  return res;
}

inline ResonanceResult resonances(const Model& model, const Rect& region, const std::vector<cplx>& extra_seeds = {},
                                  const SpectralOptions& opt = {}) {
  ResonanceResult res;
  std::vector<cplx> seeds;
  for (double e : model.atoms.epsilon) seeds.push_back(e);
  seeds.insert(seeds.end(), extra_seeds.begin(), extra_seeds.end());
  const double escale = model.energy_scale();
  auto f = [&](cplx z) { return lu_determinant(characteristic_matrix(model, z, true, opt.corrections, opt.solve, opt.contour)); };
  std::vector<std::optional<CharacteristicValue>> found(seeds.size());
  std::vector<std::string> why(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t si) {
    try {
      cplx z = seeds[si];
      const double h = 1e-6 * escale;
      bool conv = false;
      for (int it = 0; it < 60; ++it) {
        cplx fz = f(z);
        if (fz == 0.0) {
          conv = true;
          break;
        }
        cplx d = (f(z + h) - f(z - h)) / (2.0 * h);
        if (d == 0.0) break;
        cplx step = fz / d;
        double cap = 0.25 * escale;
        if (std::abs(step) > cap) step *= cap / std::abs(step);
        z -= step;
        if (std::abs(step) < 1e-15 * escale) {
          conv = true;
          break;
        }
      }
      if (!conv) {
        why[si] = "Newton did not converge";
        return;
      }
      if (z.real() < region.re_min || z.real() > region.re_max || z.imag() < region.im_min || z.imag() > region.im_max) {
        why[si] = "root left the search region";
        return;
      }
      CMatrix m = characteristic_matrix(model, z, true, opt.corrections, opt.solve, opt.contour);
      double scale = std::max(1.0, max_abs(m));
      auto cv = characterize(m, z, opt.degeneracy * scale);
      if (cv.residual > opt.accept * scale) {
        why[si] = "residual above tolerance";
        return;
      }
      found[si] = cv;
    } catch (const Error& e) {
      why[si] = e.what();
    }
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!found[i]) {
      res.failures.emplace_back(seeds[i], why[i]);
      continue;
    }
    bool dup = std::any_of(res.roots.begin(), res.roots.end(),
                           [&](const CharacteristicValue& o) { return std::abs(o.z - found[i]->z) < 1e-8 * escale; });
    if (!dup) res.roots.push_back(*found[i]);
  }
  std::sort(res.roots.begin(), res.roots.end(),
            [](const CharacteristicValue& a, const CharacteristicValue& b) { return a.z.real() < b.z.real(); });
  return res;
}

struct DominantSplit {
  double E = 0.0;
  cplx Z_tot;
  std::vector<cplx> kappa;  // real poles
  std::vector<cplx> z_s;
  cplx Delta;
  cplx Lambda;
  CMatrix B;
  double alpha = 0.0;
  double M = std::numeric_limits<double>::infinity();
  double im_delta = 0.0;
  bool bound_holds = true;
  bool z_tot_small = false;
};

inline DominantSplit dominant_split(const Model& model, double E, const SolveOptions& so = {},
                                    const ContourConfig& cc = {}) {
  auto s = sigma_boundary(model, E, Side::Above, so, cc);
  DominantSplit d;
  d.E = E;
  d.Z_tot = 0.0;
  CMatrix rest = s.contour;
  double plus_abs = 0.0;
  for (const auto& p : s.poles) {
    if (p.family == Family::Zero) {
      d.Z_tot += p.Z;
      d.kappa.push_back(p.kappa);
    } else {
      rest += p.contribution;
      plus_abs += 2.0 * pi * std::abs(p.Z);
      d.M = std::min(d.M, p.kappa.imag());
    }
  }
  if (d.kappa.empty()) throw Error(ErrorKind::EmptyRealPoleSet, "no real solutions at this energy");
  for (const auto& p : s.poles)
    if (p.family == Family::Zero) d.z_s.push_back(p.Z / d.Z_tot);
  d.z_tot_small = std::abs(d.Z_tot) < 1e-14;
  const double eps = model.atoms.epsilon.front();
  d.Delta = rest(0, 0);
  d.im_delta = d.Delta.imag();
  d.Lambda = (E - eps + d.Delta) / (2.0 * pi * d.Z_tot);
  d.B = rest / (2.0 * pi * I * d.Z_tot);
  d.B.diagonal().setZero();

  // Absolute contour integral bounds every off-diagonal contour entry.
  double btilde = 0.0;
  if (!model.entire()) {
    if (detail::is_relativistic_pair(model)) {
      const double m = model.dispersion.params.at("m");
      const double gamma = model.form_factor.params.at("gamma");
      auto f = [&](double v) {
        double sh = std::sinh(v);
        double den = std::abs(E * E + m * m * sh * sh);
        return cplx(std::isfinite(den) ? 1.0 / den : 0.0);
      };
      btilde = (gamma / pi) * std::abs(E) * gk_integrate(f, 0.0, std::numeric_limits<double>::infinity()).value.real();
    } else {
      for (const auto& c : model.cuts()) {
        const double off = 1e-150 * (1.0 + std::abs(c.anchor));
        const double t_min = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(c.anchor));
        cplx right = -I * c.direction * off;
        auto fk = [&](cplx k) { return model.G(k) / (model.omega(k) - E); };
        auto g = [&](double sv) {
          double t = sv * sv;
          if (t < t_min) return cplx(0.0);
          cplx k = c.anchor + t * c.direction;
          double v = std::abs(fk(k + right) - fk(k - right)) * 2.0 * sv;
          return cplx(std::isfinite(v) ? v : 0.0);
        };
        btilde += gk_integrate(g, 0.0, std::numeric_limits<double>::infinity()).value.real();
      }
    }
    for (const auto& c : model.cuts()) d.M = std::min(d.M, c.anchor.imag());
  }
  d.alpha = (btilde + plus_abs) / (2.0 * pi * std::abs(d.Z_tot));
  const auto& x = model.atoms.positions;
  for (std::size_t j = 0; j < model.n(); ++j)
    for (std::size_t l = 0; l < model.n(); ++l) {
      if (j == l) continue;
      double bound = d.alpha * (std::isfinite(d.M) ? std::exp(-d.M * std::abs(x[j] - x[l])) : 0.0);
      if (std::abs(d.B(j, l)) > bound * (1.0 + 1e-6) + 1e-12) d.bound_holds = false;
    }
  return d;
}

// E_j ~ eps - 2 pi i Z(k(eps)) lambda_j(k(eps)).
inline std::vector<cplx> weak_coupling_resonances(const Model& model, double eps, const SolveOptions& so = {}) {
  auto sols = complex_solutions(model, cplx(eps, 0.0), so);
  std::optional<cplx> k;
  for (std::size_t i = 0; i < sols.size(); ++i)
    if (sols.family[i] == Family::Zero) {
      if (k) throw Error(ErrorKind::InvalidParam, "more than one dominant pole at this energy");
      k = sols.solutions[i];
    }
  if (!k) throw Error(ErrorKind::EmptyRealPoleSet, "no real solutions at this energy");
  cplx Z = residue(model, *k).Z;
  auto sp = eigenvalues(model.atoms.positions, *k);
  std::vector<cplx> out;
  for (cplx l : sp.eigenvalues) out.push_back(eps - 2.0 * pi * I * Z * l);
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.imag() > b.imag(); });
  return out;
}

struct ResonantMomenta {
  std::vector<int> nu;
  std::vector<double> k;
  // Lattice only: degenerate-subspace basis (columns) and constraint vector per nu.
  std::vector<Eigen::MatrixXd> basis;
  std::vector<Eigen::VectorXd> constraint;
};

inline bool equally_spaced(const std::vector<double>& x, double tol = 1e-12) {
  if (x.size() < 2) return false;
  double d = x[1] - x[0];
  for (std::size_t j = 1; j + 1 < x.size(); ++j)
    if (std::abs((x[j + 1] - x[j]) - d) > tol * (1.0 + std::abs(d))) return false;
  return d > 0.0;
}

// k = nu pi / (x_j - x_l) for j > l (zero-based indices).
inline ResonantMomenta resonant_momenta(const std::vector<double>& x, std::size_t j, std::size_t l, int nu_min,
                                        int nu_max, bool allow_zero = false) {
  if (!(j > l) || j >= x.size()) throw Error(ErrorKind::InvalidParam, "need j > l within the array");
  double d = x[j] - x[l];
  if (!(d > 0.0)) throw Error(ErrorKind::InvalidParam, "coincident atoms have no resonant momenta");
  ResonantMomenta r;
  const bool lattice = equally_spaced(x);
  const std::size_t n = x.size();
  for (int nu = nu_min; nu <= nu_max; ++nu) {
    if (nu == 0 && !allow_zero) continue;
    r.nu.push_back(nu);
    r.k.push_back(nu * pi / d);
    if (lattice && j - l == 1) {
      double sgn = (std::abs(nu) % 2 == 1) ? 1.0 : -1.0;  // (-1)^{nu+1}
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n - 1);
      for (std::size_t c = 0; c + 1 < n; ++c) {
        b(c, c) = 1.0;
        b(c + 1, c) = sgn;
      }
      Eigen::VectorXd con(n);
      for (std::size_t a = 0; a < n; ++a) con(a) = (std::abs(nu) % 2 == 1) ? ((a % 2 == 0) ? -1.0 : 1.0) : 1.0;
      r.basis.push_back(b);
      r.constraint.push_back(con);
    }
  }
  return r;
}

}  // namespace flee
