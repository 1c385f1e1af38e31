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
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "flee/error.hpp"
#include "flee/numeric.hpp"

namespace flee {

// Ray anchor + t * direction, t >= 0, |direction| = 1. Cuts are listed for
// the upper half-plane; their mirror images under k -> -k are implied.
struct Cut {
  cplx anchor;
  cplx direction;
};

struct DispersionSpec {
  std::string name;
  std::map<std::string, double> params;
  std::function<cplx(cplx)> evaluate;
  std::function<cplx(cplx)> derivative;
  std::vector<Cut> branch_cuts;
  double minimum = 0.0;
  // Known zeros of the derivative; critical values are their images.
  std::vector<cplx> critical_points;
  // Number of solution pairs of omega(k) = z for Re z = E.
  std::function<int(double)> pairs;
  double momentum_scale = 1.0;
};

struct FormFactorSpec {
  std::string name;
  std::map<std::string, double> params;
  std::function<cplx(double)> profile;
  // Analytic continuation of |F|^2 off the real axis.
  std::function<cplx(cplx)> G;
  double coupling = 0.0;
  std::vector<Cut> branch_cuts;
};

struct AtomArray {
  std::vector<double> positions;
  std::vector<double> epsilon;

  std::size_t size() const { return positions.size(); }
};

struct Model {
  DispersionSpec dispersion;
  FormFactorSpec form_factor;
  AtomArray atoms;
  std::string preset;

  std::size_t n() const { return atoms.size(); }
  cplx omega(cplx k) const { return dispersion.evaluate(k); }
  cplx omega_prime(cplx k) const { return dispersion.derivative(k); }
  cplx G(cplx k) const { return form_factor.G(k); }

  std::vector<Cut> cuts() const {
    std::vector<Cut> all = dispersion.branch_cuts;
    for (const auto& c : form_factor.branch_cuts) {
      bool dup = std::any_of(all.begin(), all.end(), [&](const Cut& o) {
        return std::abs(o.anchor - c.anchor) < 1e-14 && std::abs(o.direction - c.direction) < 1e-14;
      });
      if (!dup) all.push_back(c);
    }
    return all;
  }

  bool entire() const { return cuts().empty(); }

  std::vector<double> critical_values() const {
    std::vector<double> out;
    for (auto k : dispersion.critical_points) {
      cplx w = omega(k);
      if (std::abs(w.imag()) < 1e-12 * (1.0 + std::abs(w))) out.push_back(w.real());
    }
    return out;
  }

  double energy_scale() const {
    double s = 1.0;
    if (std::isfinite(dispersion.minimum)) s = std::max(s, std::abs(dispersion.minimum));
    for (double e : atoms.epsilon) s = std::max(s, std::abs(e));
    return s;
  }

  double max_distance() const {
    if (atoms.positions.empty()) return 0.0;
    return atoms.positions.back() - atoms.positions.front();
  }

  CMatrix epsilon_matrix() const {
    CMatrix e = CMatrix::Zero(n(), n());
    for (std::size_t j = 0; j < n(); ++j) e(j, j) = atoms.epsilon[j];
    return e;
  }

  // Distinct |x_j - x_l| values, ascending; entry 0 is always 0.
  std::vector<double> distances() const {
    std::vector<double> d{0.0};
    for (std::size_t j = 0; j < n(); ++j)
      for (std::size_t l = 0; l < j; ++l) d.push_back(std::abs(atoms.positions[j] - atoms.positions[l]));
    std::sort(d.begin(), d.end());
    std::vector<double> out;
    for (double v : d)
      if (out.empty() || v - out.back() > 1e-13 * (1.0 + v)) out.push_back(v);
    return out;
  }

  std::size_t distance_index(std::size_t j, std::size_t l, const std::vector<double>& ds) const {
    double d = std::abs(atoms.positions[j] - atoms.positions[l]);
    std::size_t best = 0;
    for (std::size_t i = 1; i < ds.size(); ++i)
      if (std::abs(ds[i] - d) < std::abs(ds[best] - d)) best = i;
    return best;
  }

  // Fill an n x n matrix from per-distance values.
  CMatrix expand(const std::vector<cplx>& per_distance, const std::vector<double>& ds) const {
    CMatrix m(n(), n());
    for (std::size_t j = 0; j < n(); ++j)
      for (std::size_t l = 0; l < n(); ++l) m(j, l) = per_distance[distance_index(j, l, ds)];
    return m;
  }

  // True when k lies in the analyticity region (off every cut and mirror).
  bool in_domain(cplx k, double tol = 1e-12) const {
    for (const auto& c : cuts()) {
      for (int s : {1, -1}) {
        cplx rel = (double(s) * k - c.anchor) / c.direction;
        if (rel.real() >= -tol && std::abs(rel.imag()) <= tol * (1.0 + std::abs(c.anchor))) return false;
      }
    }
    return true;
  }
};

inline constexpr std::size_t default_max_atoms = 64;

namespace catalog {

inline double require(const std::map<std::string, double>& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw Error(ErrorKind::InvalidParam, "missing parameter '" + key + "'");
  if (!std::isfinite(it->second)) throw Error(ErrorKind::InvalidParam, "parameter '" + key + "' not finite");
  return it->second;
}

inline void require_positive(const std::map<std::string, double>& p, const std::string& key) {
  if (require(p, key) <= 0.0) throw Error(ErrorKind::InvalidParam, "parameter '" + key + "' must be > 0");
}

inline void require_nonnegative(const std::map<std::string, double>& p, const std::string& key) {
  if (require(p, key) < 0.0) throw Error(ErrorKind::InvalidParam, "parameter '" + key + "' must be >= 0");
}

inline void reject_unknown(const std::map<std::string, double>& p, std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : p) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
    if (!ok) throw Error(ErrorKind::InvalidParam, "unknown parameter '" + k + "'");
  }
}

// omega = sqrt(k^2 + m^2), principal branch; cuts [i m, i inf) and mirror.
inline DispersionSpec relativistic(const std::map<std::string, double>& p) {
  reject_unknown(p, {"m"});
  require_positive(p, "m");
  const double m = p.at("m");
  DispersionSpec d;
  d.name = "relativistic";
  d.params = p;
  d.evaluate = [m](cplx k) { return principal_sqrt(k * k + m * m); };
  d.derivative = [m](cplx k) { return k / principal_sqrt(k * k + m * m); };
  d.branch_cuts = {{cplx(0.0, m), cplx(0.0, 1.0)}};
  d.minimum = m;
  d.critical_points = {0.0};
  d.pairs = [](double e) { return e > 0.0 ? 1 : 0; };
  d.momentum_scale = m;
  return d;
}

inline DispersionSpec quadratic(const std::map<std::string, double>& p) {
  reject_unknown(p, {"c"});
  require_positive(p, "c");
  const double c = p.at("c");
  DispersionSpec d;
  d.name = "quadratic";
  d.params = p;
  d.evaluate = [c](cplx k) { return c * k * k; };
  d.derivative = [c](cplx k) { return 2.0 * c * k; };
  d.minimum = 0.0;
  d.critical_points = {0.0};
  d.pairs = [](double) { return 1; };
  d.momentum_scale = 1.0 / std::sqrt(c);
  return d;
}

inline DispersionSpec quartic(const std::map<std::string, double>& p) {
  reject_unknown(p, {"c"});
  require_positive(p, "c");
  const double c = p.at("c");
  DispersionSpec d;
  d.name = "quartic";
  d.params = p;
  d.evaluate = [c](cplx k) { return c * k * k * k * k; };
  d.derivative = [c](cplx k) { return 4.0 * c * k * k * k; };
  d.minimum = 0.0;
  d.critical_points = {0.0};
  d.pairs = [](double) { return 2; };
  d.momentum_scale = std::pow(c, -0.25);
  return d;
}

// Odd dispersion; violates the evenness hypothesis on purpose.
inline DispersionSpec linear(const std::map<std::string, double>& p) {
  reject_unknown(p, {"c"});
  require_positive(p, "c");
  const double c = p.at("c");
  DispersionSpec d;
  d.name = "linear";
  d.params = p;
  d.evaluate = [c](cplx k) { return c * k; };
  d.derivative = [c](cplx) { return cplx(c); };
  d.minimum = -std::numeric_limits<double>::infinity();
  d.pairs = [](double) { return 1; };
  d.momentum_scale = 1.0 / c;
  return d;
}

inline FormFactorSpec constant_ff(const std::map<std::string, double>& p) {
  reject_unknown(p, {"g"});
  require_nonnegative(p, "g");
  const double g = p.at("g");
  FormFactorSpec f;
  f.name = "constant";
  f.params = p;
  f.coupling = g;
  f.profile = [g](double) { return cplx(g / std::sqrt(2.0 * pi)); };
  f.G = [g](cplx) { return cplx(g * g / (2.0 * pi)); };
  return f;
}

// F = sqrt(gamma / 2 pi) (k^2 + m^2)^(-1/4).
inline FormFactorSpec relativistic_ff(const std::map<std::string, double>& p) {
  reject_unknown(p, {"gamma", "m"});
  require_nonnegative(p, "gamma");
  require_positive(p, "m");
  const double gamma = p.at("gamma");
  const double m = p.at("m");
  FormFactorSpec f;
  f.name = "relativistic";
  f.params = p;
  f.coupling = gamma;
  f.profile = [gamma, m](double k) { return cplx(std::sqrt(gamma / (2.0 * pi)) * std::pow(k * k + m * m, -0.25)); };
  f.G = [gamma, m](cplx k) { return gamma / (2.0 * pi * principal_sqrt(k * k + m * m)); };
  f.branch_cuts = {{cplx(0.0, m), cplx(0.0, 1.0)}};
  return f;
}

// Entire but grows along the imaginary axis.
inline FormFactorSpec gaussian_ff(const std::map<std::string, double>& p) {
  reject_unknown(p, {"g", "s"});
  require_nonnegative(p, "g");
  require_positive(p, "s");
  const double g = p.at("g");
  const double s = p.at("s");
  FormFactorSpec f;
  f.name = "gaussian";
  f.params = p;
  f.coupling = g;
  f.profile = [g, s](double k) { return cplx(g / std::sqrt(2.0 * pi) * std::exp(-k * k * s * s / 2.0)); };
  f.G = [g, s](cplx k) { return g * g / (2.0 * pi) * std::exp(-k * k * s * s); };
  return f;
}

inline DispersionSpec dispersion(const std::string& expr, const std::map<std::string, double>& p) {
  if (expr == "relativistic") return relativistic(p);
  if (expr == "quadratic") return quadratic(p);
  if (expr == "quartic") return quartic(p);
  if (expr == "linear") return linear(p);
  throw Error(ErrorKind::InvalidParam, "unknown dispersion expression '" + expr + "'");
}

inline FormFactorSpec form_factor(const std::string& expr, const std::map<std::string, double>& p) {
  if (expr == "constant") return constant_ff(p);
  if (expr == "relativistic") return relativistic_ff(p);
  if (expr == "gaussian") return gaussian_ff(p);
  throw Error(ErrorKind::InvalidParam, "unknown form factor expression '" + expr + "'");
}

}  // namespace catalog

inline AtomArray make_atoms(std::vector<double> positions, std::vector<double> epsilon,
                            std::size_t max_atoms = default_max_atoms) {
  if (positions.empty()) throw Error(ErrorKind::InvalidParam, "at least one atom required");
  if (positions.size() != epsilon.size())
    throw Error(ErrorKind::InvalidParam, "positions and epsilon differ in length");
  if (positions.size() > max_atoms) throw Error(ErrorKind::InvalidParam, "atom count exceeds cap");
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (!std::isfinite(positions[j]) || !std::isfinite(epsilon[j]))
      throw Error(ErrorKind::InvalidParam, "non-finite atom data");
    if (j > 0 && positions[j] < positions[j - 1])
      throw Error(ErrorKind::InvalidParam, "positions must be sorted ascending");
  }
  return {std::move(positions), std::move(epsilon)};
}

inline Model make_model(DispersionSpec d, FormFactorSpec f, AtomArray atoms) {
  Model m;
  m.dispersion = std::move(d);
  m.form_factor = std::move(f);
  m.atoms = std::move(atoms);
  return m;
}

// Built-in presets: "waveguide" (m, gamma) and "massless-flat" (g).
inline Model preset(const std::string& name, const std::map<std::string, double>& params,
                    std::vector<double> positions, std::vector<double> epsilon,
                    std::size_t max_atoms = default_max_atoms) {
  Model m;
  if (name == "waveguide") {
    catalog::reject_unknown(params, {"m", "gamma"});
    catalog::require_positive(params, "m");
    catalog::require_positive(params, "gamma");
    m = make_model(catalog::relativistic({{"m", params.at("m")}}), catalog::relativistic_ff(params),
                   make_atoms(std::move(positions), std::move(epsilon), max_atoms));
  } else if (name == "massless-flat") {
    catalog::reject_unknown(params, {"g"});
    catalog::require_nonnegative(params, "g");
    m = make_model(catalog::quadratic({{"c", 1.0}}), catalog::constant_ff(params),
                   make_atoms(std::move(positions), std::move(epsilon), max_atoms));
  } else {
    throw Error(ErrorKind::UnknownPreset, "unknown preset '" + name + "'");
  }
  m.preset = name;
  return m;
}

inline Model waveguide(double m, double gamma, std::vector<double> positions, std::vector<double> epsilon) {
  return preset("waveguide", {{"m", m}, {"gamma", gamma}}, std::move(positions), std::move(epsilon));
}

inline Model massless_flat(double g, std::vector<double> positions, std::vector<double> epsilon) {
  return preset("massless-flat", {{"g", g}}, std::move(positions), std::move(epsilon));
}

// G_{jl}(k) = F_j(k) conj F_l(k) = G(k) e^{i k (x_j - x_l)}.
inline CMatrix coupling_matrix(const Model& model, double k) {
  const std::size_t n = model.n();
  cplx f = model.form_factor.profile(k);
  double g = std::norm(f);
  CMatrix out(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l)
      out(j, l) = g * std::exp(I * k * (model.atoms.positions[j] - model.atoms.positions[l]));
  return out;
}

// F_j(k) = F(k) e^{i k x_j}.
inline CVector form_factor_vector(const Model& model, double k) {
  const std::size_t n = model.n();
  cplx f = model.form_factor.profile(k);
  CVector v(n);
  for (std::size_t j = 0; j < n; ++j) v(j) = f * std::exp(I * k * model.atoms.positions[j]);
  return v;
}

}  // namespace flee
