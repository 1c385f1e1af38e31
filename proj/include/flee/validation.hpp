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

#include <random>
#include <string>
#include <vector>

#include "flee/model.hpp"
#include "flee/quadrature.hpp"

namespace flee {

struct ValidationGrid {
  double k_max = 20.0;
  std::size_t real_samples = 401;
  std::size_t complex_samples = 200;
  std::vector<double> arc_radii{10.0, 20.0, 40.0, 80.0};
  std::size_t arc_samples = 181;
  double cutoff = 16.0;  // innermost normalization cutoff R
  double cauchy_tol = 1e-6;
  double z0 = -1.0;
  unsigned seed = 12345;
};

struct HypothesisCheck {
  std::string name;
  bool pass = true;
  double worst = 0.0;
  double at = 0.0;  // sample location of the worst violation
  std::string note;
};

struct NormalizationResult {
  bool converged = false;
  double value = 0.0;
  std::vector<double> cutoffs;
  std::vector<double> partial;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;
  NormalizationResult norm_omega_plus_one;  // decides Hypothesis 1
  NormalizationResult norm_omega;           // reported only
  std::vector<std::string> notes;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const HypothesisCheck& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw Error(ErrorKind::InvalidParam, "no check named " + name);
  }
};

// 2 * int_0^R G(k) / (omega(k) + shift) dk at nested cutoffs R, 2R, 4R, 8R.
inline NormalizationResult normalization_integral(const Model& model, double shift, const ValidationGrid& grid) {
  NormalizationResult res;
  auto f = [&](double k) { return model.G(k).real() / (model.omega(k).real() + shift); };
  QuadConfig cfg;
  cfg.rel_tol = 1e-13;
  double acc = 0.0;
  double lo = 0.0;
  bool resolved = std::isfinite(f(0.0));
  for (int i = 0; i < 4; ++i) {
    double R = grid.cutoff * std::pow(2.0, i);
    auto piece = gk_integrate(f, lo, R, cfg);
    if (piece.error > 1e-8 * std::max(1.0, std::abs(piece.value))) resolved = false;
    acc += 2.0 * piece.value.real();
    lo = R;
    res.cutoffs.push_back(R);
    res.partial.push_back(acc);
  }
  double d1 = std::abs(res.partial[1] - res.partial[0]);
  double d2 = std::abs(res.partial[2] - res.partial[1]);
  double d3 = std::abs(res.partial[3] - res.partial[2]);
  double scale = std::max(1.0, std::abs(res.partial[3]));
  bool finite = std::isfinite(res.partial[3]);
  bool shrinking = (d2 <= 0.75 * d1 || d2 < 1e-14 * scale) && (d3 <= 0.75 * d2 || d3 < 1e-14 * scale);
  // Increments must shrink geometrically, or already sit below the tolerance.
  res.converged = finite && resolved && (shrinking || d3 <= grid.cauchy_tol * scale);
  if (res.converged) res.value = 2.0 * gk_integrate(f, 0.0, std::numeric_limits<double>::infinity(), cfg).value.real();
  else res.value = res.partial[3];
  return res;
}

inline ValidationReport validate_hypotheses(const Model& model, const ValidationGrid& grid = {}) {
  ValidationReport rep;
  auto reals = linspace(-grid.k_max, grid.k_max, grid.real_samples);
  double wscale = 1.0;
  for (double k : reals) wscale = std::max(wscale, std::abs(model.omega(k)));

  std::mt19937 rng(grid.seed);
  std::uniform_real_distribution<double> ure(-grid.k_max, grid.k_max);
  std::uniform_real_distribution<double> uim(-grid.k_max / 4.0, grid.k_max / 4.0);
  std::vector<cplx> cpts;
  while (cpts.size() < grid.complex_samples) {
    cplx k(ure(rng), uim(rng));
    if (model.in_domain(k, 1e-3) && model.in_domain(-k, 1e-3) && model.in_domain(std::conj(k), 1e-3))
      cpts.push_back(k);
  }

  // Hypothesis 1: real, nonnegative, continuous dispersion; finite normalization.
  HypothesisCheck h1;
  h1.name = "H1";
  for (double k : reals) {
    cplx w = model.omega(k);
    double v = std::max({0.0, -w.real(), std::abs(w.imag())});
    if (v > h1.worst) {
      h1.worst = v;
      h1.at = k;
    }
  }
  h1.pass = h1.worst <= 1e-12 * wscale;
  if (h1.pass) {
    auto safe = [&](double shift) {
      try {
        return normalization_integral(model, shift, grid);
      } catch (const Error&) {
        return NormalizationResult{};
      }
    };
    rep.norm_omega_plus_one = safe(1.0);
    rep.norm_omega = safe(0.0);
    if (!rep.norm_omega_plus_one.converged) {
      h1.pass = false;
      h1.note = "normalization integral fails the Cauchy criterion";
    } else {
      h1.note = "normalization (omega+1) = " + std::to_string(rep.norm_omega_plus_one.value);
    }
    if (!rep.norm_omega.converged) rep.notes.push_back("normalization with denominator omega diverges");
  } else {
    h1.note = "omega negative or non-real on the real axis";
  }
  rep.checks.push_back(h1);

  // Hypothesis 2: evenness and reflection symmetries.
  HypothesisCheck h2;
  h2.name = "H2";
  auto note_worst = [](HypothesisCheck& h, double v, double at) {
    if (v > h.worst) {
      h.worst = v;
      h.at = at;
    }
  };
  double ff_worst = 0.0;
  bool even = true;
  for (double k : reals) {
    cplx w = model.omega(k);
    double asym = std::abs(model.omega(-k) - w);
    note_worst(h2, asym, k);
    if (asym > 1e-12 * (1.0 + std::abs(w))) even = false;
    cplx f = model.form_factor.profile(k);
    ff_worst = std::max(ff_worst, std::abs(model.form_factor.profile(-k) - std::conj(f)));
    cplx g = model.G(k);
    ff_worst = std::max(ff_worst, std::max(0.0, -g.real()) + std::abs(g.imag()));
  }
  double cplx_worst = 0.0;
  for (cplx k : cpts) {
    cplx w = model.omega(k);
    double tol = 1.0 + std::abs(w);
    cplx_worst = std::max(cplx_worst, std::abs(model.omega(-k) - w) / tol);
    cplx_worst = std::max(cplx_worst, std::abs(std::conj(w) - model.omega(std::conj(k))) / tol);
  }
  h2.pass = even && cplx_worst <= 1e-12 && ff_worst <= 1e-12;
  if (!h2.pass) h2.note = "asymmetry |omega(-k) - omega(k)| reported as worst";
  rep.checks.push_back(h2);

  // Hypothesis 3: analyticity in the declared region, probed by the derivative.
  HypothesisCheck h3;
  h3.name = "H3";
  for (cplx k : cpts) {
    double h = 1e-5 * (1.0 + std::abs(k));
    cplx fd = central_difference([&](cplx q) { return model.omega(q); }, k, h);
    cplx d = model.omega_prime(k);
    double rel = std::abs(fd - d) / (1.0 + std::abs(d));
    if (rel > h3.worst) {
      h3.worst = rel;
      h3.at = std::abs(k);
    }
  }
  h3.pass = h3.worst <= 1e-6;
  rep.checks.push_back(h3);

  // Hypothesis 4: R |G| / |omega - z0| decays on upper half-plane arcs.
  HypothesisCheck h4;
  h4.name = "H4";
  std::vector<double> arc_max;
  for (double R : grid.arc_radii) {
    double mx = 0.0;
    for (std::size_t i = 1; i + 1 < grid.arc_samples; ++i) {
      double th = pi * double(i) / double(grid.arc_samples - 1);
      cplx k = std::polar(R, th);
      if (!model.in_domain(k, 1e-3)) continue;
      double v = R * std::abs(model.G(k)) / std::abs(model.omega(k) - grid.z0);
      if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
      mx = std::max(mx, v);
    }
    arc_max.push_back(mx);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < arc_max.size(); ++i)
    if (!(arc_max[i] <= arc_max[i - 1])) decreasing = false;
  h4.worst = arc_max.back();
  h4.at = grid.arc_radii.back();
  h4.pass = decreasing && std::isfinite(arc_max.back()) &&
            (arc_max.back() <= 0.5 * arc_max.front() || arc_max.front() == 0.0);
  rep.checks.push_back(h4);

  if (model.entire()) rep.notes.push_back("entire: contour term identically zero");
  return rep;
}

}  // namespace flee
