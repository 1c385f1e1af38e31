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
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "flee/flee.hpp"

namespace {

using flee::cplx;
using flee::Error;
using flee::ErrorKind;
using flee::json;

struct Globals {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  unsigned threads = 1;
  std::optional<double> tol;
  bool skip_validation = false;
};

struct Flags {
  bool cross_check = false;
  bool parts = false;
  bool neglect = false;
  std::string method;
};

std::string fmt(double v) { return flee::fmt_double(v); }

json load_config(const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::Config, "--config is required");
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
}

const json& section(const json& cfg, const char* name) {
  static const json empty = json::object();
  if (!cfg.contains(name)) return empty;
  const auto& s = cfg.at(name);
  if (!s.is_object()) throw Error(ErrorKind::Config, std::string(name) + " must be an object");
  return s;
}

bool get_bool(const json& j, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) throw Error(ErrorKind::Config, std::string(key) + " must be a boolean");
  return j.at(key).get<bool>();
}

double get_double(const json& j, const char* key, double def) {
  if (!j.contains(key)) return def;
  return flee::get_number(j.at(key), key);
}

std::string get_string(const json& j, const char* key, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) throw Error(ErrorKind::Config, std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

std::vector<double> range_values(const json& r, const std::string& where) {
  flee::check_keys(r, {"min", "max", "count"}, where);
  double a = flee::get_number(flee::require_key(r, "min", where), where + ".min");
  double b = flee::get_number(flee::require_key(r, "max", where), where + ".max");
  double c = flee::get_number(flee::require_key(r, "count", where), where + ".count");
  if (!(c >= 1.0) || !(b >= a)) throw Error(ErrorKind::Config, where + " must be a nonempty range");
  if (c > 1.0 && !(b > a)) throw Error(ErrorKind::Config, where + " must have max > min");
  return flee::linspace(a, b, std::size_t(c));
}

flee::ModelDocument load_model(const json& cfg) {
  if (!cfg.contains("model")) throw Error(ErrorKind::Config, "missing key 'model'");
  return flee::model_from_json(cfg.at("model"));
}

void validate_or_fail(const flee::Model& model, const Globals& g) {
  if (g.skip_validation) return;
  auto rep = flee::validate_hypotheses(model);
  if (!rep.all_pass()) {
    for (const auto& c : rep.checks)
      if (!c.pass) std::cerr << c.name << " FAIL worst=" << fmt(c.worst) << " " << c.note << "\n";
    throw Error(ErrorKind::HypothesisFailure, "model fails hypothesis validation");
  }
}

flee::SolveOptions solve_options(const flee::ModelDocument& doc) {
  flee::SolveOptions so;
  so.pairs = doc.solution_pairs;
  return so;
}

// sigma -------------------------------------------------------------------

std::string cmd_sigma(const json& cfg, const Globals& g, const Flags& f) {
  flee::check_keys(cfg, {"model", "sigma"}, "config");
  auto doc = load_model(cfg);
  const auto& model = doc.model;
  const auto& sc = section(cfg, "sigma");
  flee::check_keys(sc, {"z", "E", "E_range", "side", "parts", "cross_check"}, "sigma");
  std::vector<cplx> zs;
  if (sc.contains("z")) {
    if (!sc.at("z").is_array()) throw Error(ErrorKind::Config, "sigma.z must be an array");
    for (const auto& v : sc.at("z")) zs.push_back(flee::get_complex(v, "sigma.z"));
  }
  if (sc.contains("E"))
    for (double e : flee::get_numbers(sc.at("E"), "sigma.E")) zs.push_back(e);
  if (sc.contains("E_range"))
    for (double e : range_values(sc.at("E_range"), "sigma.E_range")) zs.push_back(e);
  if (zs.empty()) throw Error(ErrorKind::Config, "sigma needs z, E or E_range");
  const std::string side_s = get_string(sc, "side", "above");
  if (side_s != "above" && side_s != "below") throw Error(ErrorKind::Config, "sigma.side must be above or below");
  const auto side = side_s == "above" ? flee::Side::Above : flee::Side::Below;
  const bool parts = f.parts || get_bool(sc, "parts", false);
  const bool cross = f.cross_check || get_bool(sc, "cross_check", false);
  validate_or_fail(model, g);
  auto so = solve_options(doc);

  struct Point {
    flee::SelfEnergyMatrix s;
    std::optional<flee::CMatrix> direct;
    double discrepancy = 0.0;
  };
  std::vector<Point> pts(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    cplx z = zs[i];
    pts[i].s = z.imag() == 0.0 ? flee::sigma_boundary(model, z.real(), side, so) : flee::sigma_decomposed(model, z, so);
    if (cross) {
      bool real_inside = z.imag() == 0.0 && std::isfinite(model.dispersion.minimum) && z.real() >= model.dispersion.minimum;
      if (!real_inside) {
        pts[i].direct = flee::sigma_direct(model, z).matrix;
        double nrm = flee::max_abs(pts[i].s.matrix);
        pts[i].discrepancy = flee::max_abs(pts[i].s.matrix - *pts[i].direct) / (1.0 + nrm);
      }
    }
  }
  const std::size_t n = model.n();
  if (g.format == "csv") {
    std::vector<std::string> head{"re_z", "im_z", "j", "l", "re_sigma", "im_sigma"};
    if (cross) head.insert(head.end(), {"re_direct", "im_direct", "discrepancy"});
    if (parts) head.insert(head.end(), {"re_contour", "im_contour"});
    flee::CsvWriter w(head);
    for (const auto& p : pts)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) {
          std::vector<std::string> row{fmt(p.s.z.real()), fmt(p.s.z.imag()), std::to_string(j), std::to_string(l),
                                       fmt(p.s.matrix(j, l).real()), fmt(p.s.matrix(j, l).imag())};
          if (cross) {
            if (p.direct) {
              row.push_back(fmt((*p.direct)(j, l).real()));
              row.push_back(fmt((*p.direct)(j, l).imag()));
              row.push_back(fmt(std::abs(p.s.matrix(j, l) - (*p.direct)(j, l)) / (1.0 + flee::max_abs(p.s.matrix))));
            } else {
              row.insert(row.end(), {"", "", ""});
            }
          }
          if (parts) {
            row.push_back(fmt(p.s.contour(j, l).real()));
            row.push_back(fmt(p.s.contour(j, l).imag()));
          }
          w.row(row);
        }
    return w.str();
  }
  json out;
  out["command"] = "sigma";
  out["model"] = flee::model_to_json(model);
  out["points"] = json::array();
  double worst = 0.0;
  for (const auto& p : pts) {
    json r;
    r["z"] = flee::to_json(p.s.z);
    r["method"] = flee::to_string(p.s.method);
    if (p.s.z.imag() == 0.0) r["side"] = side_s;
    r["matrix"] = flee::to_json(p.s.matrix);
    if (parts) {
      json pj;
      pj["contour"] = flee::to_json(p.s.contour);
      pj["poles"] = json::array();
      for (const auto& pole : p.s.poles)
        pj["poles"].push_back({{"kappa", flee::to_json(pole.kappa)},
                               {"Z", flee::to_json(pole.Z)},
                               {"family", flee::to_string(pole.family)},
                               {"contribution", flee::to_json(pole.contribution)}});
      r["parts"] = pj;
    }
    if (cross) {
      r["direct"] = p.direct ? flee::to_json(*p.direct) : json(nullptr);
      r["max_discrepancy"] = p.direct ? json(p.discrepancy) : json(nullptr);
      worst = std::max(worst, p.discrepancy);
    }
    out["points"].push_back(r);
  }
  if (cross) out["max_discrepancy"] = worst;
  return out.dump(2) + "\n";
}

// modes -------------------------------------------------------------------

json char_value_json(const flee::CharacteristicValue& cv) {
  return {{"z", flee::to_json(cv.z)},
          {"kind", flee::to_string(cv.kind)},
          {"amplitude", flee::to_json(cv.amplitude)},
          {"residual", cv.residual},
          {"degeneracy", cv.degeneracy}};
}

std::string cmd_modes(const json& cfg, const Globals& g, const Flags& f) {
  flee::check_keys(cfg, {"model", "modes"}, "config");
  auto doc = load_model(cfg);
  const auto& model = doc.model;
  const auto& mc = section(cfg, "modes");
  flee::check_keys(mc, {"E_range", "region", "seeds", "corrections", "bound_states", "resonances"}, "modes");
  flee::SpectralOptions opt;
  opt.solve = solve_options(doc);
  std::string corr = get_string(mc, "corrections", "full");
  if (f.neglect) corr = "neglect";
  if (corr == "full") opt.corrections = flee::Corrections::Full;
  else if (corr == "diagonal") opt.corrections = flee::Corrections::DiagonalOnly;
  else if (corr == "neglect") opt.corrections = flee::Corrections::Neglect;
  else throw Error(ErrorKind::Config, "modes.corrections must be full, diagonal or neglect");
  if (g.tol) opt.accept = *g.tol;
  const bool want_bound = get_bool(mc, "bound_states", true);
  const bool want_res = get_bool(mc, "resonances", true);
  std::vector<double> Es;
  if (want_bound) {
    if (!mc.contains("E_range")) throw Error(ErrorKind::Config, "modes.E_range is required for bound states");
    Es = range_values(mc.at("E_range"), "modes.E_range");
    if (Es.size() < 3) throw Error(ErrorKind::Config, "modes.E_range.count must be >= 3");
  }
  flee::Rect region{-1e300, 1e300, -1e300, 1e-9};
  if (mc.contains("region")) {
    const auto& r = mc.at("region");
    flee::check_keys(r, {"re_min", "re_max", "im_min", "im_max"}, "modes.region");
    region = {flee::get_number(flee::require_key(r, "re_min", "modes.region"), "re_min"),
              flee::get_number(flee::require_key(r, "re_max", "modes.region"), "re_max"),
              flee::get_number(flee::require_key(r, "im_min", "modes.region"), "im_min"),
              flee::get_number(flee::require_key(r, "im_max", "modes.region"), "im_max")};
    if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min))
      throw Error(ErrorKind::Config, "modes.region must be nonempty");
  }
  std::vector<cplx> seeds;
  if (mc.contains("seeds")) {
    if (!mc.at("seeds").is_array()) throw Error(ErrorKind::Config, "modes.seeds must be an array");
    for (const auto& s : mc.at("seeds")) seeds.push_back(flee::get_complex(s, "modes.seeds"));
  }
  validate_or_fail(model, g);

  std::vector<flee::CharacteristicValue> all;
  std::vector<flee::NearMiss> near;
  std::vector<std::pair<cplx, std::string>> failures;
  if (want_bound) {
    auto b = flee::bound_states(model, Es.front(), Es.back(), Es.size(), opt);
    all = b.states;
    near = b.near_misses;
  }
  if (want_res) {
    auto r = flee::resonances(model, region, seeds, opt);
    failures = r.failures;
    const double sc = model.energy_scale();
    for (const auto& cv : r.roots) {
      bool dup = std::any_of(all.begin(), all.end(), [&](const auto& o) { return std::abs(o.z - cv.z) < 1e-7 * sc; });
      if (!dup) all.push_back(cv);
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
  });
  if (g.format == "csv") {
    flee::CsvWriter w({"re_z", "im_z", "kind", "residual", "degeneracy"});
    for (const auto& cv : all)
      w.row({fmt(cv.z.real()), fmt(cv.z.imag()), flee::to_string(cv.kind), fmt(cv.residual), std::to_string(cv.degeneracy)});
    return w.str();
  }
  json out;
  out["command"] = "modes";
  out["model"] = flee::model_to_json(model);
  out["corrections"] = corr;
  out["modes"] = json::array();
  for (const auto& cv : all) out["modes"].push_back(char_value_json(cv));
  out["near_misses"] = json::array();
  for (const auto& nm : near) out["near_misses"].push_back({{"E", nm.E}, {"sigma_min", nm.sigma_min}});
  out["failures"] = json::array();
  for (const auto& [s, why] : failures) out["failures"].push_back({{"seed", flee::to_json(s)}, {"reason", why}});
  return out.dump(2) + "\n";
}

// phase-sweep -------------------------------------------------------------

std::string cmd_phase_sweep(const json& cfg, const Globals& g, const Flags&) {
  flee::check_keys(cfg, {"model", "phase_sweep"}, "config");
  const auto& pc = section(cfg, "phase_sweep");
  flee::check_keys(pc, {"positions", "k_min", "k_max", "step", "eta"}, "phase_sweep");
  std::vector<double> x;
  if (pc.contains("positions")) {
    x = flee::get_numbers(pc.at("positions"), "phase_sweep.positions");
    flee::make_atoms(x, std::vector<double>(x.size(), 0.0));
  } else {
    x = load_model(cfg).model.atoms.positions;
  }
  if (x.empty()) throw Error(ErrorKind::Config, "phase_sweep needs positions");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] < x[i - 1]) throw Error(ErrorKind::Config, "positions must be sorted");
  double k0 = flee::get_number(flee::require_key(pc, "k_min", "phase_sweep"), "k_min");
  double k1 = flee::get_number(flee::require_key(pc, "k_max", "phase_sweep"), "k_max");
  double step = flee::get_number(flee::require_key(pc, "step", "phase_sweep"), "step");
  double eta = get_double(pc, "eta", 0.0);
  if (!(step > 0.0)) throw Error(ErrorKind::Config, "phase_sweep.step must be positive");
  if (!(k1 >= k0)) throw Error(ErrorKind::Config, "phase_sweep k range is empty");
  if (eta < 0.0) throw Error(ErrorKind::Config, "phase_sweep.eta must be >= 0");
  auto tr = flee::trajectory_sweep(x, k0, k1, step, eta);
  if (g.format == "csv") {
    flee::CsvWriter w({"k", "branch", "re_lambda", "im_lambda", "ambiguous"});
    for (std::size_t i = 0; i < tr.k.size(); ++i)
      for (std::size_t b = 0; b < tr.branches[i].size(); ++b)
        w.row({fmt(tr.k[i]), std::to_string(b), fmt(tr.branches[i][b].real()), fmt(tr.branches[i][b].imag()),
               tr.ambiguous[i] ? "1" : "0"});
    return w.str();
  }
  json out;
  out["command"] = "phase-sweep";
  out["positions"] = x;
  out["eta"] = eta;
  auto P = flee::trajectory_period(x);
  out["period"] = P ? json(*P) : json(nullptr);
  out["k"] = tr.k;
  out["branches"] = json::array();
  for (const auto& row : tr.branches) {
    json r = json::array();
    for (cplx v : row) r.push_back(flee::to_json(v));
    out["branches"].push_back(r);
  }
  out["ambiguous"] = tr.ambiguous;
  return out.dump(2) + "\n";
}

// evolve ------------------------------------------------------------------

std::string cmd_evolve(const json& cfg, const Globals& g, const Flags& f) {
  flee::check_keys(cfg, {"model", "evolve"}, "config");
  auto doc = load_model(cfg);
  const auto& model = doc.model;
  const auto& ec = section(cfg, "evolve");
  flee::check_keys(ec, {"a0", "field", "t", "t_grid", "grid", "bromwich", "ode", "method"}, "evolve");
  std::string method = f.method.empty() ? get_string(ec, "method", "ode") : f.method;
  if (method != "ode" && method != "bromwich" && method != "both")
    throw Error(ErrorKind::Config, "evolve.method must be ode, bromwich or both");
  const std::size_t n = model.n();
  flee::CVector a0 = flee::CVector::Zero(n);
  if (ec.contains("a0")) {
    const auto& a = ec.at("a0");
    if (!a.is_array() || a.size() != n) throw Error(ErrorKind::Config, "evolve.a0 must have one entry per atom");
    for (std::size_t j = 0; j < n; ++j) a0(j) = flee::get_complex(a[j], "evolve.a0");
  } else {
    a0(0) = 1.0;
  }
  flee::FieldPacket packet;
  if (ec.contains("field")) {
    const auto& p = ec.at("field");
    flee::check_keys(p, {"amplitude", "k0", "width", "x0"}, "evolve.field");
    packet.amplitude = get_double(p, "amplitude", 0.0);
    packet.k0 = get_double(p, "k0", 0.0);
    packet.width = get_double(p, "width", 1.0);
    packet.x0 = get_double(p, "x0", 0.0);
    if (!(packet.width > 0.0)) throw Error(ErrorKind::Config, "evolve.field.width must be positive");
  }
  std::vector<double> ts;
  if (ec.contains("t_grid")) ts = flee::get_numbers(ec.at("t_grid"), "evolve.t_grid");
  else if (ec.contains("t")) ts = range_values(ec.at("t"), "evolve.t");
  if (ts.empty()) throw Error(ErrorKind::Config, "evolve needs a nonempty t or t_grid");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < 0.0) throw Error(ErrorKind::Config, "times must be >= 0");
    if (i && !(ts[i] > ts[i - 1])) throw Error(ErrorKind::Config, "times must increase");
  }
  if (method != "ode" && packet.amplitude != 0.0)
    throw Error(ErrorKind::Config, "the Bromwich method supports purely atomic initial states only");
  flee::FieldGridSpec gs;
  if (ec.contains("grid")) {
    const auto& gj = ec.at("grid");
    flee::check_keys(gj, {"cutoff", "fine_step", "coarse_step", "window"}, "evolve.grid");
    gs.cutoff = get_double(gj, "cutoff", gs.cutoff);
    gs.fine_step = get_double(gj, "fine_step", gs.fine_step);
    gs.coarse_step = get_double(gj, "coarse_step", gs.coarse_step);
    gs.window = get_double(gj, "window", gs.window);
  }
  flee::OdeConfig oc;
  if (ec.contains("ode")) {
    const auto& oj = ec.at("ode");
    flee::check_keys(oj, {"abs_tol", "rel_tol"}, "evolve.ode");
    oc.abs_tol = get_double(oj, "abs_tol", oc.abs_tol);
    oc.rel_tol = get_double(oj, "rel_tol", oc.rel_tol);
  }
  flee::BromwichConfig bc;
  if (ec.contains("bromwich")) {
    const auto& bj = ec.at("bromwich");
    flee::check_keys(bj, {"delta", "window", "tol"}, "evolve.bromwich");
    if (bj.contains("delta")) bc.delta = get_double(bj, "delta", 0.0);
    if (bj.contains("window")) bc.window = get_double(bj, "window", 0.0);
    bc.tol = get_double(bj, "tol", bc.tol);
  }
  if (g.tol) bc.tol = *g.tol;
  validate_or_fail(model, g);
  auto so = solve_options(doc);

  std::optional<flee::OdeTrajectory> ode;
  std::optional<flee::BromwichResult> brom;
  if (method != "bromwich") {
    auto grid = flee::make_field_grid(model, gs);
    flee::ExcitationState init{a0, {}};
    if (packet.amplitude != 0.0)
      for (double k : grid.k) init.field.push_back(packet(k));
    ode = flee::evolve_ode(model, init, ts, grid, oc);
  }
  if (method != "ode") brom = flee::survival_amplitude_bromwich(model, a0, ts, bc, so);

  double worst = 0.0;
  if (ode && brom)
    for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(ode->survival[i] - brom->amplitude[i]));
  if (g.format == "csv") {
    std::vector<std::string> head{"t"};
    if (ode) head.insert(head.end(), {"re_A_ode", "im_A_ode", "abs2_A_ode", "norm"});
    if (brom) head.insert(head.end(), {"re_A_bromwich", "im_A_bromwich", "abs2_A_bromwich"});
    if (ode && brom) head.push_back("discrepancy");
    flee::CsvWriter w(head);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      std::vector<std::string> row{fmt(ts[i])};
      if (ode) {
        cplx A = ode->survival[i];
        row.insert(row.end(), {fmt(A.real()), fmt(A.imag()), fmt(std::norm(A)), fmt(ode->norm[i])});
      }
      if (brom) {
        cplx A = brom->amplitude[i];
        row.insert(row.end(), {fmt(A.real()), fmt(A.imag()), fmt(std::norm(A))});
      }
      if (ode && brom) row.push_back(fmt(std::abs(ode->survival[i] - brom->amplitude[i])));
      w.row(row);
    }
    return w.str();
  }
  json out;
  out["command"] = "evolve";
  out["model"] = flee::model_to_json(model);
  out["t"] = ts;
  if (ode) {
    json o;
    o["amplitude"] = json::array();
    for (cplx A : ode->survival) o["amplitude"].push_back(flee::to_json(A));
    o["norm"] = ode->norm;
    o["max_drift"] = ode->max_drift;
    o["recurrence_time"] = ode->recurrence_time;
    o["drift_warning"] = ode->drift_warning;
    out["ode"] = o;
  }
  if (brom) {
    json b;
    b["amplitude"] = json::array();
    for (cplx A : brom->amplitude) b["amplitude"].push_back(flee::to_json(A));
    b["delta"] = brom->delta;
    b["window"] = brom->window;
    b["tail_estimate"] = brom->tail_estimate;
    out["bromwich"] = b;
  }
  if (ode && brom) out["max_discrepancy"] = worst;
  return out.dump(2) + "\n";
}

// check -------------------------------------------------------------------

std::string cmd_check(const json& cfg, const Globals& g, const Flags&, bool& failed) {
  flee::check_keys(cfg, {"model", "check"}, "config");
  auto doc = load_model(cfg);
  const auto& model = doc.model;
  const auto& cc = section(cfg, "check");
  flee::check_keys(cc, {"k_max", "arc_radii", "cutoff"}, "check");
  flee::ValidationGrid grid;
  grid.k_max = get_double(cc, "k_max", grid.k_max);
  grid.cutoff = get_double(cc, "cutoff", grid.cutoff);
  if (cc.contains("arc_radii")) grid.arc_radii = flee::get_numbers(cc.at("arc_radii"), "check.arc_radii");
  if (grid.arc_radii.size() < 2) throw Error(ErrorKind::Config, "check.arc_radii needs at least two radii");
  auto rep = flee::validate_hypotheses(model, grid);
  failed = !rep.all_pass();

  json inv = json::object();
  if (!failed) {
    double herm = 0.0, transp = 0.0;
    for (double k : flee::linspace(-5.0, 5.0, 41)) {
      auto G = flee::coupling_matrix(model, k);
      herm = std::max(herm, flee::max_abs(G - G.adjoint()));
      transp = std::max(transp, flee::max_abs(flee::coupling_matrix(model, -k) - G.transpose()));
    }
    inv["coupling_hermitian_defect"] = herm;
    inv["coupling_reflection_defect"] = transp;
    cplx z0(model.energy_scale() + 0.5, 0.5);
    auto s = flee::sigma_decomposed(model, z0, solve_options(doc));
    inv["probe_z"] = flee::to_json(z0);
    inv["sigma_transpose_defect"] = flee::max_abs(s.matrix - s.matrix.transpose());
    inv["herglotz_min_eigenvalue"] = flee::min_hermitian_eigenvalue(flee::antihermitian_part(s.matrix));
    auto d = flee::sigma_direct(model, z0);
    inv["decomposed_vs_direct"] = flee::max_abs(s.matrix - d.matrix) / (1.0 + flee::max_abs(s.matrix));
  }
  std::ostringstream human;
  for (const auto& c : rep.checks)
    human << c.name << " " << (c.pass ? "PASS" : "FAIL") << " worst=" << fmt(c.worst) << " at=" << fmt(c.at)
          << (c.note.empty() ? "" : " (" + c.note + ")") << "\n";
  if (rep.norm_omega.converged)
    human << "normalization with omega: " << fmt(rep.norm_omega.value) << "\n";
  for (const auto& note : rep.notes) human << "note: " << note << "\n";
  human << (failed ? "FAIL" : "PASS") << "\n";
  std::cerr << human.str();

  if (g.format == "csv") {
    flee::CsvWriter w({"hypothesis", "pass", "worst", "at"});
    for (const auto& c : rep.checks) w.row({c.name, c.pass ? "1" : "0", fmt(c.worst), fmt(c.at)});
    return w.str();
  }
  json out;
  out["command"] = "check";
  out["model"] = flee::model_to_json(model);
  out["pass"] = !failed;
  out["hypotheses"] = json::array();
  for (const auto& c : rep.checks)
    out["hypotheses"].push_back({{"name", c.name}, {"pass", c.pass}, {"worst", c.worst}, {"at", c.at}, {"note", c.note}});
  auto norm_json = [](const flee::NormalizationResult& r) {
    return json{{"converged", r.converged}, {"value", r.converged ? json(r.value) : json(nullptr)}};
  };
  out["normalization"] = {{"omega_plus_one", norm_json(rep.norm_omega_plus_one)}, {"omega", norm_json(rep.norm_omega)}};
  out["notes"] = rep.notes;
  out["invariants"] = inv;
  return out.dump(2) + "\n";
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::InvalidParam:
    case ErrorKind::UnknownPreset:
      return 2;
    case ErrorKind::HypothesisFailure:
      return 3;
    default:
      return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and dynamical computations for Friedrichs-Lee models"};
  app.set_version_flag("--version", flee::version);
  Globals g;
  Flags f;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out", g.out_path, "Output file (stdout when absent)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--tol", g.tol, "Tolerance override")->check(CLI::PositiveNumber);
  app.add_flag("--skip-validation", g.skip_validation, "Skip the hypothesis checks before computing");
  app.fallthrough();

  auto* sigma = app.add_subcommand("sigma", "Self-energy matrix at complex or real energies");
  sigma->add_flag("--cross-check", f.cross_check, "Also evaluate by direct quadrature");
  sigma->add_flag("--parts", f.parts, "Include the pole/contour breakdown");
  auto* modes = app.add_subcommand("modes", "Bound states and resonances");
  modes->add_flag("--neglect-corrections", f.neglect, "Drop the contour and complex-pole corrections");
  auto* sweep = app.add_subcommand("phase-sweep", "Eigenvalue trajectories of -i Phi_n(k + i eta)");
  auto* evolve = app.add_subcommand("evolve", "Survival amplitude in time");
  evolve->add_option("--method", f.method, "ode, bromwich or both")->check(CLI::IsMember({"ode", "bromwich", "both"}));
  auto* check = app.add_subcommand("check", "Hypothesis validation report");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  flee::set_threads(g.threads);

  try {
    json cfg = load_config(g.config_path);
    if (!cfg.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    std::string text;
    bool failed = false;
    if (*sigma) text = cmd_sigma(cfg, g, f);
    else if (*modes) text = cmd_modes(cfg, g, f);
    else if (*sweep) text = cmd_phase_sweep(cfg, g, f);
    else if (*evolve) text = cmd_evolve(cfg, g, f);
    else if (*check) text = cmd_check(cfg, g, f, failed);
    if (g.out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(g.out_path);
      if (!out) throw Error(ErrorKind::Config, "cannot write " + g.out_path);
      out << text;
    }
    return failed ? 3 : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
