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

#include "flee/model.hpp"

namespace flee {

enum class Family { Plus, Zero, Complex };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Plus: return "PlusFamily";
    case Family::Zero: return "ZeroFamily";
    case Family::Complex: return "Complex";
  }
  return "";
}

struct SolutionSet {
  cplx z;
  std::vector<cplx> solutions;
  std::vector<Family> family;
  bool second_sheet = false;

  std::size_t size() const { return solutions.size(); }
};

struct CriticalSet {
  std::vector<cplx> points;
  std::vector<cplx> values;
  std::vector<int> order;
};

struct SolutionPath {
  std::vector<cplx> z;
  std::vector<cplx> kappa;
  std::vector<double> u;  // Re omega
  std::vector<double> v;  // Im omega
};

struct Rect {
  double re_min, re_max, im_min, im_max;
};

struct TrackOptions {
  int max_corrector = 5;
  double min_step_fraction = 1e-12;
  double critical_tol = 1e-10;
  double residual_tol = 1e-13;
};

struct SolveOptions {
  double collision_tol = 1e-6;  // relative to the energy scale
  double residual_tol = 1e-10;
  double real_tol = 1e-9;       // |Im z| below this counts as real
  std::optional<int> pairs;     // overrides the catalog count
  TrackOptions track;
};

inline double solution_residual(const Model& model, cplx k, cplx z) { return std::abs(model.omega(k) - z); }

// Newton on omega(k) = z; returns nullopt when it fails to converge.
inline std::optional<cplx> newton_solve(const Model& model, cplx k, cplx z, int iters = 60, double tol = 1e-14) {
  for (int i = 0; i < iters; ++i) {
    cplx d = model.omega_prime(k);
    if (std::abs(d) == 0.0 || !std::isfinite(std::abs(d))) return std::nullopt;
    cplx step = (model.omega(k) - z) / d;
    k -= step;
    if (!std::isfinite(std::abs(k))) return std::nullopt;
    if (std::abs(step) <= tol * (1.0 + std::abs(k))) {
      if (solution_residual(model, k, z) <= 1e-10 * (1.0 + std::abs(z))) return k;
    }
  }
  if (solution_residual(model, k, z) <= 1e-12 * (1.0 + std::abs(z))) return k;
  return std::nullopt;
}

// Smallest k_max > 0 with omega(k_max) > E, by doubling from the momentum scale.
inline double auto_window(const Model& model, double E) {
  double b = std::max(1.0, model.dispersion.momentum_scale);
  for (int i = 0; i < 200; ++i) {
    if (model.omega(b).real() > E) return 2.0 * b;
    b *= 2.0;
  }
  return b;
}

inline std::vector<double> real_solutions(const Model& model, double E, double k_lo, double k_hi,
                                          std::size_t scan = 2048) {
  std::vector<double> roots;
  k_lo = std::max(k_lo, 0.0);
  if (!(k_hi > k_lo)) return roots;
  auto f = [&](double k) { return model.omega(k).real() - E; };
  const double scale = 1.0 + std::abs(E);
  auto grid = linspace(k_lo, k_hi, scan);
  std::vector<double> fv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) fv[i] = f(grid[i]);
  auto polish = [&](double a, double b) {
    double fa = f(a);
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(b)); ++it) {
      double m = 0.5 * (a + b);
      double fm = f(m);
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    double k = 0.5 * (a + b);
    for (int it = 0; it < 3; ++it) {
      double d = model.omega_prime(k).real();
      if (d == 0.0) break;
      double nk = k - f(k) / d;
      if (std::abs(nk - k) > (b - a) + 1e-12 * (1.0 + std::abs(k))) break;
      k = nk;
    }
    return k;
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (fv[i] == 0.0) roots.push_back(grid[i]);
    if (i + 1 < grid.size() && fv[i] != 0.0 && fv[i + 1] != 0.0 && (fv[i] < 0) != (fv[i + 1] < 0))
      roots.push_back(polish(grid[i], grid[i + 1]));
  }
  std::vector<double> out;
  for (double r : roots) {
    if (std::abs(f(r)) > 1e-12 * scale * 10.0 && std::abs(f(r)) > 1e-10) continue;
    if (out.empty() || std::abs(r - out.back()) > 1e-9) out.push_back(r);
  }
  if (out.empty() && std::isfinite(model.dispersion.minimum) && E > model.dispersion.minimum &&
      fv.front() < 0.0 && fv.back() < 0.0)
    throw Error(ErrorKind::WindowTooSmall, "omega(k) - E keeps its sign across the window");
  return out;
}

inline std::vector<double> real_solutions(const Model& model, double E) {
  return real_solutions(model, E, 0.0, auto_window(model, E));
}

inline void check_collision(const Model& model, cplx z, const SolveOptions& opt) {
  for (double c : model.critical_values())
    if (std::abs(z - c) < opt.collision_tol * model.energy_scale())
      throw Error(ErrorKind::NearCriticalValue, "z is within tolerance of the critical value " + std::to_string(c));
}

// Canonical member of a +-pair: Im k > 0, or omega'(k) > 0 when real.
inline cplx canonical(const Model& model, cplx k, double tol = 1e-12) {
  if (std::abs(k.imag()) > tol * (1.0 + std::abs(k))) return k.imag() > 0 ? k : -k;
  return model.omega_prime(k).real() >= 0 ? k : -k;
}

inline bool same_pair(cplx a, cplx b, double tol = 1e-8) {
  double s = tol * (1.0 + std::abs(a));
  return std::abs(a - b) < s || std::abs(a + b) < s;
}

inline CriticalSet critical_points(const Model& model, const Rect& region, std::size_t grid = 15) {
  CriticalSet cs;
  auto second = [&](cplx k) {
    double h = 1e-5 * (1.0 + std::abs(k));
    return central_difference([&](cplx q) { return model.omega_prime(q); }, k, h);
  };
  auto inside = [&](cplx k) {
    return k.real() >= region.re_min - 1e-12 && k.real() <= region.re_max + 1e-12 && k.imag() >= region.im_min - 1e-12 &&
           k.imag() <= region.im_max + 1e-12 && model.in_domain(k, 1e-9);
  };
  for (std::size_t a = 0; a < grid; ++a) {
    for (std::size_t b = 0; b < grid; ++b) {
      cplx k(region.re_min + (region.re_max - region.re_min) * (double(a) + 0.5) / double(grid),
             region.im_min + (region.im_max - region.im_min) * (double(b) + 0.5) / double(grid));
      if (!model.in_domain(k, 1e-6)) continue;
      bool ok = false;
      for (int it = 0; it < 200; ++it) {
        cplx d1 = model.omega_prime(k);
        if (std::abs(d1) < 1e-13) {
          ok = true;
          break;
        }
        cplx d2 = second(k);
        if (std::abs(d2) == 0.0) break;
        k -= d1 / d2;
        if (!std::isfinite(std::abs(k)) || !model.in_domain(k, 1e-9)) break;
      }
      if (!ok || !inside(k)) continue;
      if (std::abs(k.real()) < 1e-9) k.real(0.0);
      if (std::abs(k.imag()) < 1e-9) k.imag(0.0);
      bool dup = std::any_of(cs.points.begin(), cs.points.end(), [&](cplx p) { return std::abs(p - k) < 1e-6; });
      if (!dup) cs.points.push_back(k);
    }
  }
  std::sort(cs.points.begin(), cs.points.end(),
            [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  for (cplx k : cs.points) {
    cs.values.push_back(model.omega(k));
    // Order from Taylor coefficients on a small circle that stays off the cuts.
    double rho = 0.25 * std::max(0.01, model.dispersion.momentum_scale);
    for (const auto& c : model.cuts()) rho = std::min(rho, 0.25 * std::abs(k - c.anchor));
    const int N = 64;
    std::vector<cplx> coef(8, 0.0);
    for (int i = 0; i < N; ++i) {
      double th = 2.0 * pi * i / N;
      cplx w = model.omega(k + std::polar(rho, th));
      for (int j = 0; j < 8; ++j) coef[j] += w * std::polar(1.0, -j * th) / double(N);
    }
    double total = 0.0;
    for (int j = 1; j < 8; ++j) total += std::abs(coef[j]);
    int order = 0;
    for (int j = 2; j < 8; ++j)
      if (std::abs(coef[j]) > 1e-6 * total) {
        order = j;
        break;
      }
    cs.order.push_back(order);
  }
  return cs;
}

// Predictor-corrector continuation of one solution along a polyline in z.
inline SolutionPath track_solution(const Model& model, cplx z0, cplx k0, const std::vector<cplx>& path,
                                   const TrackOptions& opt = {}) {
  SolutionPath sp;
  auto record = [&](cplx z, cplx k) {
    cplx w = model.omega(k);
    sp.z.push_back(z);
    sp.kappa.push_back(k);
    sp.u.push_back(w.real());
    sp.v.push_back(w.imag());
  };
  cplx z = z0;
  cplx k = k0;
  record(z, k);
  const double dscale = std::max(1.0, std::abs(model.omega_prime(k0)));
  for (cplx target : path) {
    cplx seg = target - z;
    double len = std::abs(seg);
    if (len == 0.0) {
      record(z, k);
      continue;
    }
    double done = 0.0;
    double h = 1.0;
    // Initial step bounded so the predicted momentum change stays moderate.
    {
      double dk = len / std::max(std::abs(model.omega_prime(k)), 1e-300);
      double cap = 0.1 * (std::abs(k) + model.dispersion.momentum_scale);
      if (dk > cap) h = cap / dk;
    }
    cplx zs = z;
    while (done < 1.0) {
      double step = std::min(h, 1.0 - done);
      cplx zn = zs + seg * step;
      if (1.0 - done - step < 1e-15) zn = target;
      cplx d = model.omega_prime(k);
      if (std::abs(d) < opt.critical_tol * dscale)
        throw Error(ErrorKind::CriticalCollision, "derivative vanishes along the path");
      cplx kp = k + (zn - zs) / d;
      cplx kc = kp;
      bool conv = false;
      for (int it = 0; it < opt.max_corrector; ++it) {
        cplx dd = model.omega_prime(kc);
        if (std::abs(dd) == 0.0) break;
        cplx corr = (model.omega(kc) - zn) / dd;
        kc -= corr;
        if (!std::isfinite(std::abs(kc))) break;
        if (std::abs(model.omega(kc) - zn) <= opt.residual_tol * (1.0 + std::abs(zn))) {
          conv = true;
          break;
        }
      }
      bool jump = std::abs(kc - kp) > 0.5 * std::abs(kp - k) + 1e-12 * (1.0 + std::abs(k));
      if (!conv || jump || !model.in_domain(kc, 0.0)) {
        h = step / 2.0;
        if (h < opt.min_step_fraction) throw Error(ErrorKind::StepUnderflow, "continuation step underflow");
        continue;
      }
      k = kc;
      zs = zn;
      done += step;
      record(zs, k);
      h = std::min(1.0, step * 1.5);
    }
    z = target;
  }
  return sp;
}

namespace detail {

// Solutions of omega(k) = E for real E: real roots, imaginary-axis roots and
// a grid-seeded Newton sweep when the expected pair count is not reached.
inline std::vector<cplx> real_energy_solutions(const Model& model, double E, int expected) {
  std::vector<cplx> out;
  auto add = [&](cplx k) {
    k = canonical(model, k);
    for (cplx o : out)
      if (same_pair(o, k)) return;
    out.push_back(k);
  };
  for (double k : real_solutions(model, E))
    if (k > 0.0 || model.omega_prime(k).real() != 0.0) add(k);

  // Imaginary axis, up to the first cut.
  double eta_max = 1e4 * std::max(1.0, model.dispersion.momentum_scale);
  for (const auto& c : model.cuts())
    if (std::abs(c.anchor.real()) < 1e-14 && c.anchor.imag() > 0) eta_max = std::min(eta_max, c.anchor.imag());
  {
    double top = eta_max;
    for (double e = std::max(1.0, model.dispersion.momentum_scale); e < eta_max; e *= 2.0) {
      if (std::abs(model.omega(cplx(0.0, e))) > 4.0 * (std::abs(E) + 1.0)) {
        top = 2.0 * e;
        break;
      }
    }
    top = std::min(top, eta_max * (1.0 - 1e-12));
    auto fr = [&](double eta) {
      cplx w = model.omega(cplx(0.0, eta));
      return w.real() - E;
    };
    const std::size_t N = 1024;
    auto grid = linspace(0.0, top, N);
    for (std::size_t i = 1; i + 1 < N; ++i) {
      double a = grid[i], b = grid[i + 1];
      double fa = fr(a), fb = fr(b);
      if (fa == 0.0) {
        add(cplx(0.0, a));
        continue;
      }
      if ((fa < 0) == (fb < 0)) continue;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        double m = 0.5 * (a + b);
        if ((fr(m) < 0) == (fa < 0)) {
          a = m;
          fa = fr(m);
        } else {
          b = m;
        }
      }
      cplx k(0.0, 0.5 * (a + b));
      auto pol = newton_solve(model, k, E, 10);
      if (pol && std::abs(pol->real()) < 1e-10 && model.in_domain(*pol)) add(*pol);
      else if (std::abs(model.omega(k) - E) < 1e-10 * (1.0 + std::abs(E))) add(k);
    }
  }

  if (int(out.size()) < expected) {
    double R = auto_window(model, std::abs(E) + 1.0);
    for (int a = 1; a <= 12; ++a) {
      for (int b = 0; b <= 12; ++b) {
        cplx seed = std::polar(R * a / 12.0, pi * b / 12.0);
        if (!model.in_domain(seed, 1e-6)) continue;
        auto k = newton_solve(model, seed, E);
        if (k && model.in_domain(*k)) add(*k);
      }
    }
  }
  return out;
}

inline Family classify(cplx k, double tol) {
  return std::abs(k.imag()) <= tol * (1.0 + std::abs(k)) ? Family::Zero : Family::Plus;
}

}  // namespace detail

// All solution representatives of omega(k) = z. For Im z < 0 the result is the
// continuation of the upper half-plane set across the real axis at Re z.
inline SolutionSet complex_solutions(const Model& model, cplx z, const SolveOptions& opt = {}) {
  check_collision(model, z, opt);
  const double scale = model.energy_scale();
  SolutionSet set;
  set.z = z;

  if (z.imag() < -opt.real_tol) {
    SolutionSet up = complex_solutions(model, std::conj(z), opt);
    set.second_sheet = true;
    for (cplx k : up.solutions) {
      auto sp = track_solution(model, up.z, k, {cplx(z.real(), 0.0), z}, opt.track);
      set.solutions.push_back(sp.kappa.back());
      set.family.push_back(Family::Complex);
    }
    return set;
  }

  const double E = z.real();
  if (std::abs(z.imag()) <= opt.real_tol) {
    int expected = opt.pairs.value_or(model.dispersion.pairs(E));
    set.solutions = detail::real_energy_solutions(model, E, expected);
    for (cplx k : set.solutions) set.family.push_back(detail::classify(k, 1e-9));
  } else {
    // Seed at a real energy away from critical values, then move up and across.
    double Es = E;
    auto dist = [&](double e) {
      double d = std::numeric_limits<double>::infinity();
      for (double c : model.critical_values()) d = std::min(d, std::abs(e - c));
      return d;
    };
    if (dist(Es) < 1e-3 * scale) {
      double best = Es, bd = -1.0;
      for (double c : {0.5, 1.0, 2.0, -0.5, -1.0, -2.0}) {
        double cand = E + c * std::max(std::abs(z.imag()), 1e-2 * scale);
        if (dist(cand) > bd) {
          bd = dist(cand);
          best = cand;
        }
      }
      Es = best;
    }
    int expected = opt.pairs.value_or(model.dispersion.pairs(Es));
    auto seeds = detail::real_energy_solutions(model, Es, expected);
    for (cplx k : seeds) {
      std::vector<cplx> path{cplx(Es, z.imag())};
      if (Es != E) path.push_back(z);
      auto sp = track_solution(model, Es, k, path, opt.track);
      cplx kk = sp.kappa.back();
      if (kk.imag() < 0) kk = -kk;
      set.solutions.push_back(kk);
      set.family.push_back(Family::Complex);
    }
  }
  for (cplx k : set.solutions)
    if (solution_residual(model, k, z) > opt.residual_tol * (1.0 + std::abs(z)))
      throw Error(ErrorKind::SeedFailure, "solution failed the residual check");
  return set;
}

}  // namespace flee
