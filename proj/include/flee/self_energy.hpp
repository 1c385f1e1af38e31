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

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <vector>

#include "flee/dispersion.hpp"
#include "flee/parallel.hpp"
#include "flee/quadrature.hpp"

namespace flee {

enum class SigmaMethod { DirectQuadrature, Decomposition, Continuation, Boundary };

inline const char* to_string(SigmaMethod m) {
  switch (m) {
    case SigmaMethod::DirectQuadrature: return "DirectQuadrature";
    case SigmaMethod::Decomposition: return "Decomposition";
    case SigmaMethod::Continuation: return "Continuation";
    case SigmaMethod::Boundary: return "Boundary";
  }
  return "";
}

enum class Side { Above, Below };

struct ResidueTerm {
  cplx kappa;
  cplx Z;
};

struct PoleTerm {
  cplx kappa;
  cplx Z;
  Family family = Family::Complex;
  CMatrix contribution;  // 2 pi i Z Phi(kappa), possibly conjugated on the lower side
};

struct SelfEnergyMatrix {
  cplx z;
  CMatrix matrix;
  SigmaMethod method = SigmaMethod::Decomposition;
  bool has_parts = false;
  CMatrix contour;  // b(z)
  std::vector<PoleTerm> poles;
  double error_estimate = 0.0;
};

struct ContourConfig {
  double too_close = 1e-9;  // relative distance to omega(Gamma)
  QuadConfig quad{1e-12, 1e-15, 18};
};

inline ResidueTerm residue(const Model& model, cplx kappa) {
  cplx d = model.omega_prime(kappa);
  if (std::abs(d) < 1e-10 * std::max(1.0, std::abs(model.omega(kappa))))
    throw Error(ErrorKind::CriticalMomentum, "omega' vanishes at the requested momentum");
  return {kappa, model.G(kappa) / d};
}

namespace detail {

inline bool is_relativistic_pair(const Model& model) {
  if (model.dispersion.name != "relativistic" || model.form_factor.name != "relativistic") return false;
  return std::abs(model.dispersion.params.at("m") - model.form_factor.params.at("m")) == 0.0;
}

// b_D(z) = -(gamma/pi) z int_0^inf e^{-D m cosh v} / (z^2 + m^2 sinh^2 v) dv.
inline cplx waveguide_contour(double m, double gamma, double D, cplx z, const QuadConfig& q) {
  if (z == 0.0) return 0.0;
  auto f = [&](double v) {
    double s = std::sinh(v);
    double e = D == 0.0 ? 1.0 : std::exp(-D * m * std::cosh(v));
    if (e == 0.0) return cplx(0.0);
    return e / (z * z + m * m * s * s);
  };
  // Split where m sinh v ~ |z| so a sharp peak is never straddled blindly.
  double vpk = std::asinh(std::abs(z) / m);
  std::vector<double> br{0.0};
  if (vpk > 1e-8) br.push_back(vpk);
  cplx acc = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) acc += gk_integrate(f, br[i], br[i + 1], q).value;
  acc += gk_integrate(f, br.back(), std::numeric_limits<double>::infinity(), q).value;
  return -(gamma / pi) * z * acc;
}

// Discontinuity integral around one upward cut: int_0^inf [f(right) - f(left)] d dt.
inline cplx cut_integral(const Model& model, const Cut& cut, double D, cplx z, const QuadConfig& q) {
  const double off = 1e-150 * (1.0 + std::abs(cut.anchor));
  cplx right = -I * cut.direction * off;
  auto f = [&](cplx k) { return model.G(k) * std::exp(I * k * D) / (model.omega(k) - z); };
  // Below t_min the anchor swallows t in double precision; the dropped piece
  // is O(sqrt(t_min)) for a square-root branch point.
  const double t_min = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(cut.anchor));
  auto g = [&](double s) {
    double t = s * s;
    if (t < t_min) return cplx(0.0);
    cplx k = cut.anchor + t * cut.direction;
    cplx v = (f(k + right) - f(k - right)) * cut.direction * (2.0 * s);
    return std::isfinite(std::abs(v)) ? v : cplx(0.0);
  };
  return gk_integrate(g, 0.0, std::numeric_limits<double>::infinity(), q).value;
}

inline void check_contour_distance(const Model& model, cplx z, const ContourConfig& cfg) {
  const double scale = model.energy_scale();
  if (detail::is_relativistic_pair(model)) {
    if (z != 0.0 && std::abs(z.real()) < cfg.too_close * scale)
      throw Error(ErrorKind::ContourTooClose, "z lies on the image of the cut");
    return;
  }
  for (const auto& c : model.cuts()) {
    for (int i = 0; i <= 400; ++i) {
      double t = std::pow(10.0, -6.0 + 12.0 * i / 400.0);
      cplx k = c.anchor + t * c.direction;
      cplx off = -I * c.direction * 1e-150;
      for (cplx kk : {k + off, k - off})
        if (std::abs(model.omega(kk) - z) < cfg.too_close * scale)
          throw Error(ErrorKind::ContourTooClose, "z lies on the image of the cut");
    }
  }
}

}  // namespace detail

// Per-distance contour values b_D(z).
inline std::vector<cplx> contour_values(const Model& model, cplx z, const std::vector<double>& ds,
                                        const ContourConfig& cfg = {}) {
  std::vector<cplx> out(ds.size(), 0.0);
  if (model.entire()) return out;
  detail::check_contour_distance(model, z, cfg);
  if (detail::is_relativistic_pair(model)) {
    const double m = model.dispersion.params.at("m");
    const double gamma = model.form_factor.params.at("gamma");
    parallel_for(ds.size(), [&](std::size_t i) { out[i] = detail::waveguide_contour(m, gamma, ds[i], z, cfg.quad); });
    return out;
  }
  const auto cuts = model.cuts();
  parallel_for(ds.size(), [&](std::size_t i) {
    for (const auto& c : cuts) out[i] += detail::cut_integral(model, c, ds[i], z, cfg.quad);
  });
  return out;
}

// Contour term evaluated numerically around the cuts, bypassing closed forms.
inline std::vector<cplx> contour_values_generic(const Model& model, cplx z, const std::vector<double>& ds,
                                                const ContourConfig& cfg = {}) {
  std::vector<cplx> out(ds.size(), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (const auto& c : model.cuts()) out[i] += detail::cut_integral(model, c, ds[i], z, cfg.quad);
  return out;
}

inline CMatrix contour_term(const Model& model, cplx z, const ContourConfig& cfg = {}) {
  auto ds = model.distances();
  return model.expand(contour_values(model, z, ds, cfg), ds);
}

// 2 pi i Z(kappa) e^{i kappa D} per distance.
inline std::vector<cplx> pole_values(const Model& model, cplx kappa, const std::vector<double>& ds) {
  auto r = residue(model, kappa);
  std::vector<cplx> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = 2.0 * pi * I * r.Z * std::exp(I * kappa * ds[i]);
  return out;
}

// b(z) + sum_s 2 pi i Z(k_s) Phi(k_s) from a precomputed solution set.
inline SelfEnergyMatrix assemble_sigma(const Model& model, cplx z, const std::vector<cplx>& sols,
                                       const std::vector<Family>& fam, SigmaMethod method,
                                       const ContourConfig& cfg = {}) {
  auto ds = model.distances();
  SelfEnergyMatrix s;
  s.z = z;
  s.method = method;
  s.has_parts = true;
  auto b = contour_values(model, z, ds, cfg);
  s.contour = model.expand(b, ds);
  s.matrix = s.contour;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    auto pv = pole_values(model, sols[i], ds);
    PoleTerm p{sols[i], residue(model, sols[i]).Z, fam.empty() ? Family::Complex : fam[i], model.expand(pv, ds)};
    s.matrix += p.contribution;
    s.poles.push_back(std::move(p));
  }
  return s;
}

inline SelfEnergyMatrix reflect(const SelfEnergyMatrix& s) {
  SelfEnergyMatrix r = s;
  r.z = std::conj(s.z);
  r.matrix = s.matrix.adjoint();
  r.contour = s.contour.adjoint();
  for (auto& p : r.poles) {
    p.kappa = std::conj(p.kappa);
    p.Z = std::conj(p.Z);
    p.contribution = p.contribution.adjoint();
  }
  return r;
}

inline SelfEnergyMatrix sigma_boundary(const Model& model, double E, Side side, const SolveOptions& opt = {},
                                       const ContourConfig& cfg = {}) {
  for (double c : model.critical_values())
    if (std::abs(E - c) < opt.collision_tol * model.energy_scale())
      throw Error(ErrorKind::CriticalValue, "E is a critical value of omega");
  auto sols = complex_solutions(model, cplx(E, 0.0), opt);
  auto s = assemble_sigma(model, E, sols.solutions, sols.family, SigmaMethod::Boundary, cfg);
  if (side == Side::Below) {
    s.matrix = s.contour;
    for (auto& p : s.poles) {
      if (p.family == Family::Zero) p.contribution = p.contribution.adjoint().eval();
      s.matrix += p.contribution;
    }
  }
  return s;
}

inline SelfEnergyMatrix sigma_decomposed(const Model& model, cplx z, const SolveOptions& opt = {},
                                         const ContourConfig& cfg = {}) {
  if (std::abs(z.imag()) <= opt.real_tol) {
    auto s = sigma_boundary(model, z.real(), z.imag() < 0 ? Side::Below : Side::Above, opt, cfg);
    s.method = SigmaMethod::Decomposition;
    return s;
  }
  if (z.imag() < 0) return reflect(sigma_decomposed(model, std::conj(z), opt, cfg));
  auto sols = complex_solutions(model, z, opt);
  return assemble_sigma(model, z, sols.solutions, sols.family, SigmaMethod::Decomposition, cfg);
}

// Second-sheet continuation for Im z < 0; equals sigma_decomposed on Im z >= 0.
inline SelfEnergyMatrix sigma_continuation(const Model& model, cplx z, const SolveOptions& opt = {},
                                           const ContourConfig& cfg = {}) {
  if (z.imag() >= -opt.real_tol) {
    auto s = sigma_decomposed(model, cplx(z.real(), std::max(z.imag(), 0.0)), opt, cfg);
    s.method = SigmaMethod::Continuation;
    return s;
  }
  auto sols = complex_solutions(model, z, opt);
  return assemble_sigma(model, z, sols.solutions, sols.family, SigmaMethod::Continuation, cfg);
}

struct DirectConfig {
  QuadConfig quad{1e-11, 1e-14, 16};
  double panel = 1.0;  // base panel width in units of the momentum scale
};

namespace detail {

// int_K^inf h(k) cos(k D) dk for D > 0 via the Ooura double-exponential rule.
template <class H>
cplx fourier_tail(H&& h, double K, double D) {
  static thread_local boost::math::quadrature::ooura_fourier_cos<double> ocos(1e-12, 8);
  static thread_local boost::math::quadrature::ooura_fourier_sin<double> osin(1e-12, 8);
  auto re = [&](double u) { return h(K + u).real(); };
  auto im = [&](double u) { return h(K + u).imag(); };
  double c = std::cos(K * D), s = std::sin(K * D);
  double rc = ocos.integrate(re, D).first, rs = osin.integrate(re, D).first;
  double ic = ocos.integrate(im, D).first, is = osin.integrate(im, D).first;
  return cplx(c * rc - s * rs, c * ic - s * is);
}

}  // namespace detail

// Sigma_{jl}(z) = int G(k) e^{ik(x_j - x_l)} / (omega(k) - z) dk by quadrature.
inline SelfEnergyMatrix sigma_direct(const Model& model, cplx z, const DirectConfig& cfg = {}) {
  for (double k : {0.37, 1.3, 4.1})
    if (std::abs(model.omega(k) - model.omega(-k)) > 1e-12 * (1.0 + std::abs(model.omega(k))))
      throw Error(ErrorKind::InvalidParam, "direct quadrature needs an even dispersion");
  const double mscale = model.dispersion.momentum_scale;
  std::vector<double> roots;
  if (std::abs(z.imag()) == 0.0) {
    if (std::isfinite(model.dispersion.minimum) && z.real() >= model.dispersion.minimum)
      throw Error(ErrorKind::PoleOnPath, "real z inside the continuum; use sigma_boundary");
  }
  if (!std::isfinite(model.dispersion.minimum) || z.real() > model.dispersion.minimum)
    roots = real_solutions(model, z.real());
  double kmax = 10.0 * mscale;
  for (double r : roots) kmax = std::max(kmax, 2.0 * r + 10.0 * mscale);
  std::vector<double> br;
  for (double k = 0.0; k < kmax; k += cfg.panel * mscale) br.push_back(k);
  br.push_back(kmax);
  for (double r : roots) {
    double w = std::max(std::abs(z.imag()) / std::max(std::abs(model.omega_prime(r)), 1e-300), 1e-14);
    for (double f : {1.0, 4.0, 16.0, 64.0, 256.0}) {
      br.push_back(r - f * w);
      br.push_back(r + f * w);
    }
    br.push_back(r);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::remove_if(br.begin(), br.end(), [&](double v) { return v < 0.0 || v > kmax; }), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());

  auto ds = model.distances();
  std::vector<cplx> vals(ds.size());
  std::vector<double> errs(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    const double D = ds[i];
    auto h = [&](double k) { return model.G(k).real() / (model.omega(k) - z); };
    auto f = [&](double k) { return D == 0.0 ? h(k) : h(k) * std::cos(k * D); };
    auto body = gk_integrate_panels(f, br, cfg.quad);
    cplx tail;
    if (D == 0.0) tail = gk_integrate(f, kmax, std::numeric_limits<double>::infinity(), cfg.quad).value;
    else tail = detail::fourier_tail(h, kmax, D);
    vals[i] = 2.0 * (body.value + tail);
    errs[i] = 2.0 * body.error;
  });
  SelfEnergyMatrix s;
  s.z = z;
  s.method = SigmaMethod::DirectQuadrature;
  s.matrix = model.expand(vals, ds);
  s.error_estimate = *std::max_element(errs.begin(), errs.end());
  return s;
}

}  // namespace flee
