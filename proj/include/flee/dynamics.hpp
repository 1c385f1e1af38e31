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

#include <boost/numeric/odeint.hpp>
#include <optional>
#include <vector>

#include "flee/spectral.hpp"

namespace flee {

struct FieldGrid {
  std::vector<double> k;
  std::vector<double> w;  // composite trapezoid weights
  double cutoff = 0.0;
};

struct FieldGridSpec {
  double cutoff = 10.0;       // |k| <= cutoff is resolved, the rest is eliminated
  double fine_step = 0.01;    // spacing within the resonance windows
  double coarse_step = 0.02;  // spacing elsewhere
  double window = 1.0;        // half-width of each window around +-k_hat
  std::vector<double> centers;  // k_hat values; empty means derive from epsilon
};

// Gaussian field packet xi_0(k) = amplitude exp(-(k - k0)^2 / (2 width^2)) e^{-i k x0}.
struct FieldPacket {
  double amplitude = 0.0;
  double k0 = 0.0;
  double width = 1.0;
  double x0 = 0.0;

  cplx operator()(double k) const {
    return amplitude * std::exp(-(k - k0) * (k - k0) / (2.0 * width * width)) * std::exp(-I * k * x0);
  }
};

struct ExcitationState {
  CVector a;
  std::vector<cplx> field;  // xi on the grid
};

struct OdeConfig {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  double drift_tol = 1e-6;
  bool keep_field = false;
};

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<CVector> a;
  std::vector<cplx> survival;
  std::vector<double> norm;
  std::vector<std::vector<cplx>> field;
  double max_drift = 0.0;
  double recurrence_time = 0.0;
  bool drift_warning = false;
  CMatrix tail_shift;  // Sigma of the eliminated modes at the reference energy
};

inline std::vector<double> resonance_momenta(const Model& model) {
  std::vector<double> ks;
  for (double e : model.atoms.epsilon) {
    if (std::isfinite(model.dispersion.minimum) && e <= model.dispersion.minimum) continue;
    for (double k : real_solutions(model, e))
      if (k > 0.0) ks.push_back(k);
  }
  return ks;
}

inline FieldGrid make_field_grid(const Model& model, FieldGridSpec spec) {
  if (!(spec.cutoff > 0.0) || !(spec.fine_step > 0.0) || !(spec.coarse_step > 0.0))
    throw Error(ErrorKind::InvalidParam, "field grid parameters must be positive");
  if (spec.centers.empty()) spec.centers = resonance_momenta(model);
  auto fine_at = [&](double k) {
    for (double c : spec.centers)
      if (std::abs(std::abs(k) - c) <= spec.window) return true;
    return false;
  };
  FieldGrid g;
  g.cutoff = spec.cutoff;
  std::vector<double> pos{0.0};
  double k = 0.0;
  while (k < spec.cutoff) {
    double h = fine_at(k) || fine_at(k + spec.coarse_step) ? spec.fine_step : spec.coarse_step;
    k = std::min(spec.cutoff, k + h);
    if (spec.cutoff - k < 1e-3 * h) k = spec.cutoff;
    pos.push_back(k);
  }
  for (std::size_t i = pos.size() - 1; i > 0; --i) g.k.push_back(-pos[i]);
  for (double v : pos) g.k.push_back(v);
  const std::size_t N = g.k.size();
  g.w.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    double lo = i > 0 ? g.k[i - 1] : g.k[i];
    double hi = i + 1 < N ? g.k[i + 1] : g.k[i];
    g.w[i] = 0.5 * (hi - lo);
  }
  return g;
}

// Sigma restricted to |k| > cutoff at a real reference energy below the cutoff band.
inline CMatrix tail_sigma(const Model& model, double cutoff, double E_ref) {
  auto ds = model.distances();
  std::vector<cplx> v(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double D = ds[i];
    auto h = [&](double k) { return model.G(k).real() / (model.omega(k) - E_ref); };
    if (D == 0.0) v[i] = 2.0 * gk_integrate(h, cutoff, std::numeric_limits<double>::infinity()).value;
    else v[i] = 2.0 * detail::fourier_tail(h, cutoff, D);
  }
  return model.expand(v, ds);
}

inline OdeTrajectory evolve_ode(const Model& model, const ExcitationState& initial, const std::vector<double>& t_grid,
                                const FieldGrid& grid, const OdeConfig& cfg = {}) {
  namespace odeint = boost::numeric::odeint;
  const std::size_t n = model.n();
  const std::size_t N = grid.k.size();
  if (t_grid.empty()) throw Error(ErrorKind::InvalidParam, "empty time grid");
  if (initial.a.size() != Eigen::Index(n)) throw Error(ErrorKind::InvalidParam, "amplitude length differs from n");
  if (!initial.field.empty() && initial.field.size() != N)
    throw Error(ErrorKind::InvalidParam, "field length differs from the grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw Error(ErrorKind::InvalidParam, "time grid must increase");
  const double t_max = t_grid.back();

  OdeTrajectory out;
  // Recurrence: the finest level spacing near each resonance sets the revival time.
  out.recurrence_time = std::numeric_limits<double>::infinity();
  for (double kh : resonance_momenta(model)) {
    auto it = std::lower_bound(grid.k.begin(), grid.k.end(), kh);
    if (it == grid.k.end() || it == grid.k.begin()) continue;
    double dk = *it - *(it - 1);
    double dw = std::abs(model.omega_prime(kh)) * dk;
    if (dw > 0) out.recurrence_time = std::min(out.recurrence_time, 2.0 * pi / dw);
  }
  if (out.recurrence_time <= t_max)
    throw Error(ErrorKind::GridTooCoarse, "field grid recurrence time is shorter than the horizon");

  double E_ref = 0.0;
  for (double e : model.atoms.epsilon) E_ref += e / double(n);
  out.tail_shift = tail_sigma(model, grid.cutoff, E_ref);
  CMatrix Heff = model.epsilon_matrix() - out.tail_shift;

  // psi_i = sqrt(w_i) xi_i keeps the generator Hermitian.
  CMatrix C(n, N);
  std::vector<double> om(N);
  for (std::size_t i = 0; i < N; ++i) {
    CVector f = form_factor_vector(model, grid.k[i]);
    C.col(i) = std::sqrt(grid.w[i]) * f;
    om[i] = model.omega(grid.k[i]).real();
  }
  using State = std::vector<cplx>;
  State y(n + N, 0.0);
  for (std::size_t j = 0; j < n; ++j) y[j] = initial.a(j);
  for (std::size_t i = 0; i < N && !initial.field.empty(); ++i) y[n + i] = std::sqrt(grid.w[i]) * initial.field[i];
  const State y0 = y;
  auto rhs = [&](const State& s, State& ds, double) {
    Eigen::Map<const CVector> a(s.data(), n);
    Eigen::Map<const CVector> psi(s.data() + n, N);
    Eigen::Map<CVector> da(ds.data(), n);
    Eigen::Map<CVector> dpsi(ds.data() + n, N);
    da.noalias() = -I * (Heff * a + C * psi);
    dpsi.noalias() = -I * (C.adjoint() * a);
    for (std::size_t i = 0; i < N; ++i) dpsi(i) += -I * om[i] * psi(i);
  };
  double norm0 = 0.0;
  for (auto v : y0) norm0 += std::norm(v);
  auto observe = [&](const State& s, double t) {
    out.t.push_back(t);
    CVector a(n);
    for (std::size_t j = 0; j < n; ++j) a(j) = s[j];
    out.a.push_back(a);
    cplx ov = 0.0;
    double nn = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      ov += std::conj(y0[i]) * s[i];
      nn += std::norm(s[i]);
    }
    out.survival.push_back(ov);
    out.norm.push_back(nn);
    out.max_drift = std::max(out.max_drift, std::abs(nn - norm0));
    if (cfg.keep_field) {
      std::vector<cplx> xi(N);
      for (std::size_t i = 0; i < N; ++i) xi[i] = s[n + i] / std::sqrt(grid.w[i]);
      out.field.push_back(std::move(xi));
    }
  };
  auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<State>());
  std::vector<double> times = t_grid;
  double t0 = std::min(0.0, times.front());
  if (times.front() > t0) times.insert(times.begin(), t0);
  bool skip_first = t_grid.front() > t0;
  std::size_t count = 0;
  odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), 0.01, [&](const State& s, double t) {
    if (!(skip_first && count++ == 0)) observe(s, t);
  });
  out.drift_warning = out.max_drift > 10.0 * cfg.drift_tol * std::max(1.0, norm0);
  return out;
}

// Evaluates Sigma(z) along a sequence of nearby points by reusing the previous
// solution set as Newton seeds.
class SigmaTracker {
 public:
  explicit SigmaTracker(const Model& model, SolveOptions opt = {}) : model_(model), opt_(opt), ds_(model.distances()) {}

  CMatrix operator()(cplx z) {
    refresh(z);
    std::vector<cplx> v = contour_values(model_, z, ds_);
    for (cplx k : sols_) {
      auto p = pole_values(model_, k, ds_);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += p[i];
    }
    return model_.expand(v, ds_);
  }

 private:
  void refresh(cplx z) {
    int expected = opt_.pairs.value_or(model_.dispersion.pairs(z.real()));
    bool ok = have_ && int(sols_.size()) == expected;
    if (ok) {
      std::vector<cplx> next;
      for (cplx k : sols_) {
        auto r = newton_solve(model_, k, z, 20);
        if (!r || !model_.in_domain(*r) || r->imag() <= 0.0 || std::abs(*r - k) > 0.5 * (std::abs(k) + 1e-3)) {
          ok = false;
          break;
        }
        next.push_back(*r);
      }
      if (ok) sols_ = next;
    }
    if (!ok) {
      sols_ = complex_solutions(model_, z, opt_).solutions;
      have_ = true;
    }
  }

  const Model& model_;
  SolveOptions opt_;
  std::vector<double> ds_;
  std::vector<cplx> sols_;
  bool have_ = false;
};

inline CVector source_vector(const Model& model, const FieldPacket& xi0, cplx z) {
  const std::size_t n = model.n();
  CVector out = CVector::Zero(n);
  if (xi0.amplitude == 0.0) return out;
  double lo = xi0.k0 - 12.0 * xi0.width, hi = xi0.k0 + 12.0 * xi0.width;
  std::vector<double> br = linspace(lo, hi, 65);
  for (std::size_t j = 0; j < n; ++j) {
    auto f = [&](double k) {
      return xi0(k) * model.form_factor.profile(k) * std::exp(I * k * model.atoms.positions[j]) / (model.omega(k) - z);
    };
    out(j) = gk_integrate_panels(f, br).value;
  }
  return out;
}

// a_hat(z) = i int_0^inf a(t) e^{izt} dt = [E - z - Sigma(z)]^{-1} [a0 + int F xi0 / (omega - z) dk].
inline CVector resolvent_amplitude(const Model& model, const CVector& a0, const FieldPacket& xi0, cplx z,
                                   const SolveOptions& so = {}) {
  if (!(z.imag() > 0.0)) throw Error(ErrorKind::InvalidParam, "resolvent_amplitude needs Im z > 0");
  const std::size_t n = model.n();
  CMatrix M = model.epsilon_matrix() - z * CMatrix::Identity(n, n) - sigma_decomposed(model, z, so).matrix;
  auto sv = singular_values(M);
  if (sv(0) / sv(n - 1) > 1e12) throw Error(ErrorKind::NearSingular, "resolvent system is ill-conditioned");
  return M.fullPivLu().solve(a0 + source_vector(model, xi0, z));
}

struct BromwichConfig {
  std::optional<double> delta;
  std::optional<double> window;  // R; chosen adaptively when absent
  double tol = 1e-5;
  double max_window = 1e5;
};

struct BromwichResult {
  std::vector<double> t;
  std::vector<cplx> amplitude;
  double delta = 0.0;
  double window = 0.0;
  double tail_estimate = 0.0;
  std::size_t nodes = 0;
};

inline double spectral_gap_scale(const Model& model) {
  double g = std::numeric_limits<double>::infinity();
  const auto& e = model.atoms.epsilon;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (double c : model.critical_values()) g = std::min(g, std::abs(e[i] - c));
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(e[i] - e[j]) > 0.0) g = std::min(g, std::abs(e[i] - e[j]));
  }
  return std::isfinite(g) ? g : 1.0;
}

inline BromwichResult survival_amplitude_bromwich(const Model& model, const CVector& a0, const std::vector<double>& t_grid,
                                                  const BromwichConfig& cfg = {}, const SolveOptions& so = {}) {
  if (t_grid.empty()) throw Error(ErrorKind::InvalidParam, "empty time grid");
  const std::size_t n = model.n();
  BromwichResult res;
  res.t = t_grid;
  res.delta = cfg.delta.value_or(std::clamp(0.5 * spectral_gap_scale(model), 1e-3, 1.0));
  if (!(res.delta > 0.0)) throw Error(ErrorKind::InvalidParam, "contour height must be positive");
  double t_max = 0.0;
  for (double t : t_grid) t_max = std::max(t_max, std::abs(t));
  const double delta = res.delta;
  const double h = std::min(pi / (4.0 * std::max(t_max, 1e-9)), delta / 2.0);
  const CMatrix Em = model.epsilon_matrix();

  auto integrand = [&](SigmaTracker& tr, double x) {
    cplx z(x, delta);
    CMatrix M = Em - z * CMatrix::Identity(n, n) - tr(z);
    CVector r = M.partialPivLu().solve(a0);
    cplx full = a0.dot(r);
    cplx free = 0.0;
    for (std::size_t j = 0; j < n; ++j) free += std::norm(a0(j)) / (model.atoms.epsilon[j] - z);
    return full - free;
  };
  auto tail_bound = [&](double fR, double R) {
    double worst = 0.0;
    for (double t : t_grid) {
      double len = t > 0 ? std::min(R / 1.5, 2.0 / t) : R / 1.5;
      worst = std::max(worst, 2.0 * fR * len * std::exp(delta * t) / (2.0 * pi));
    }
    return worst;
  };
  double R = cfg.window.value_or(std::max(50.0, 20.0 * model.energy_scale()));
  if (!cfg.window) {
    SigmaTracker tr(model, so);
    for (;;) {
      double fR = std::max(std::abs(integrand(tr, R)), std::abs(integrand(tr, -R)));
      res.tail_estimate = tail_bound(fR, R);
      if (res.tail_estimate <= cfg.tol) break;
      if (2.0 * R > cfg.max_window)
        throw Error(ErrorKind::TruncationDominated, "Bromwich tail estimate exceeds tolerance at the largest window");
      R *= 2.0;
    }
  } else {
    SigmaTracker tr(model, so);
    double fR = std::max(std::abs(integrand(tr, R)), std::abs(integrand(tr, -R)));
    res.tail_estimate = tail_bound(fR, R);
    if (res.tail_estimate > cfg.tol)
      throw Error(ErrorKind::TruncationDominated, "Bromwich tail estimate exceeds tolerance");
  }
  res.window = R;

  const auto gl = gauss_legendre_10();
  const std::size_t panels = std::size_t(std::ceil(2.0 * R / h));
  const double hw = 2.0 * R / double(panels);
  // Chunks of panels are tracked independently so the result does not depend on the thread count.
  const std::size_t chunk = 256;
  const std::size_t nchunks = (panels + chunk - 1) / chunk;
  std::vector<std::vector<std::pair<double, cplx>>> nodes(nchunks);
  parallel_for(nchunks, [&](std::size_t c) {
    SigmaTracker tr(model, so);
    for (std::size_t p = c * chunk; p < std::min(panels, (c + 1) * chunk); ++p) {
      double mid = -R + (double(p) + 0.5) * hw;
      for (std::size_t q = 0; q < gl.x.size(); ++q) {
        double x = mid + 0.5 * hw * gl.x[q];
        nodes[c].emplace_back(x, integrand(tr, x) * (0.5 * hw * gl.w[q]));
      }
    }
  });
  res.amplitude.assign(t_grid.size(), 0.0);
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const double t = t_grid[i];
    cplx acc = 0.0;
    for (const auto& ch : nodes)
      for (const auto& [x, fw] : ch) acc += fw * std::exp(-I * x * t);
    cplx free = 0.0;
    for (std::size_t j = 0; j < n; ++j) free += std::norm(a0(j)) * std::exp(-I * model.atoms.epsilon[j] * t);
    res.amplitude[i] = free + (-I / (2.0 * pi)) * std::exp(delta * t) * acc;
  });
  res.nodes = panels * gl.x.size();
  return res;
}

struct ModeDecomposition {
  std::vector<cplx> poles;
  std::vector<cplx> weights;
  std::vector<double> t;
  std::vector<cplx> remainder;
  std::vector<cplx> reconstructed;  // sum_s W_s e^{-i z_s t}
};

// W_s = -(1/2 pi i) oint a0^dag [E - z - Sigma^(II)(z)]^{-1} a0 dz on a circle around each pole.
inline cplx mode_weight(const Model& model, const CVector& a0, cplx pole, double rho, int N = 64,
                        const SolveOptions& so = {}) {
  const std::size_t n = model.n();
  const double escale = model.energy_scale();
  for (double c : model.critical_values())
    if (std::abs(pole - c) < 1.5 * rho)
      throw Error(ErrorKind::PoleCircleCrossesCut, "circle reaches a critical value");
  if (detail::is_relativistic_pair(model) && std::abs(pole.real()) < 1.5 * rho)
    throw Error(ErrorKind::PoleCircleCrossesCut, "circle reaches the image of the cut");
  (void)escale;
  cplx acc = 0.0;
  for (int i = 0; i < N; ++i) {
    double th = 2.0 * pi * (i + 0.5) / N;
    cplx dz = std::polar(rho, th);
    cplx z = pole + dz;
    CMatrix M = model.epsilon_matrix() - z * CMatrix::Identity(n, n) - sigma_continuation(model, z, so).matrix;
    cplx f = a0.dot(M.partialPivLu().solve(a0));
    acc += f * I * dz * (2.0 * pi / N);
  }
  return -acc / (2.0 * pi * I);
}

inline ModeDecomposition mode_decompose(const Model& model, const CVector& a0, const std::vector<cplx>& poles,
                                        const BromwichResult& bromwich, std::optional<double> rho = std::nullopt,
                                        const SolveOptions& so = {}) {
  ModeDecomposition md;
  md.poles = poles;
  md.t = bromwich.t;
  for (std::size_t s = 0; s < poles.size(); ++s) {
    double r = rho.value_or(0.0);
    if (!rho) {
      r = std::max(0.5 * std::abs(poles[s].imag()), 1e-3);
      r = std::min(r, 0.1 * model.energy_scale());
      for (std::size_t q = 0; q < poles.size(); ++q)
        if (q != s) r = std::min(r, 0.3 * std::abs(poles[q] - poles[s]));
      for (double c : model.critical_values()) r = std::min(r, 0.5 * std::abs(poles[s] - c));
    }
    md.weights.push_back(mode_weight(model, a0, poles[s], r, 64, so));
  }
  for (std::size_t i = 0; i < md.t.size(); ++i) {
    cplx rec = 0.0;
    for (std::size_t s = 0; s < poles.size(); ++s) rec += md.weights[s] * std::exp(-I * poles[s] * md.t[i]);
    md.reconstructed.push_back(rec);
    md.remainder.push_back(bromwich.amplitude[i] - rec);
  }
  return md;
}

// Least-squares slope of -log|A|^2 over [t0, t1].
inline double fit_decay_rate(const std::vector<double>& t, const std::vector<cplx>& A, double t0, double t1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    double y = std::log(std::norm(A[i]));
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    ++m;
  }
  if (m < 2) throw Error(ErrorKind::InvalidParam, "too few samples in the fit window");
  return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace flee
