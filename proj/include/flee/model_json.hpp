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

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "flee/model.hpp"

namespace flee {

using json = nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
    if (!ok) throw Error(ErrorKind::Config, "unknown key '" + it.key() + "' in " + where);
  }
}

inline const json& require_key(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::Config, "missing key '" + std::string(key) + "' in " + where);
  return j.at(key);
}

inline double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorKind::Config, where + " must be a number");
  return j.get<double>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorKind::Config, where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_number(v, where));
  return out;
}

inline std::map<std::string, double> get_params(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  std::map<std::string, double> p;
  for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = get_number(it.value(), where + "." + it.key());
  return p;
}

inline cplx get_complex(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Config, where + " must be [re, im]");
  return {get_number(j[0], where), get_number(j[1], where)};
}

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(to_json(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

inline json to_json(const CVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

// Model document: {"preset", "params", "positions", "epsilon"} or
// {"dispersion": {"expr", "params"}, "form_factor": {"expr", "params"},
//  "positions", "epsilon", "solution_pairs"}; "max_atoms" is optional in both.
struct ModelDocument {
  Model model;
  std::optional<int> solution_pairs;
};

inline ModelDocument model_from_json(const json& j) {
  const std::string where = "model";
  std::size_t cap = default_max_atoms;
  if (j.is_object() && j.contains("max_atoms")) cap = std::size_t(get_number(j.at("max_atoms"), "model.max_atoms"));
  ModelDocument doc;
  try {
    if (j.is_object() && j.contains("preset")) {
      check_keys(j, {"preset", "params", "positions", "epsilon", "max_atoms"}, where);
      const auto& name = require_key(j, "preset", where);
      if (!name.is_string()) throw Error(ErrorKind::Config, "model.preset must be a string");
      auto params = get_params(require_key(j, "params", where), "model.params");
      doc.model = preset(name.get<std::string>(), params, get_numbers(require_key(j, "positions", where), "model.positions"),
                         get_numbers(require_key(j, "epsilon", where), "model.epsilon"), cap);
    } else {
      check_keys(j, {"dispersion", "form_factor", "positions", "epsilon", "solution_pairs", "max_atoms"}, where);
      const auto& d = require_key(j, "dispersion", where);
      const auto& f = require_key(j, "form_factor", where);
      check_keys(d, {"expr", "params"}, "model.dispersion");
      check_keys(f, {"expr", "params"}, "model.form_factor");
      auto dexpr = require_key(d, "expr", "model.dispersion");
      auto fexpr = require_key(f, "expr", "model.form_factor");
      if (!dexpr.is_string() || !fexpr.is_string()) throw Error(ErrorKind::Config, "expr must be a string");
      auto dp = d.contains("params") ? get_params(d.at("params"), "model.dispersion.params") : std::map<std::string, double>{};
      auto fp = f.contains("params") ? get_params(f.at("params"), "model.form_factor.params") : std::map<std::string, double>{};
      doc.model = make_model(catalog::dispersion(dexpr.get<std::string>(), dp), catalog::form_factor(fexpr.get<std::string>(), fp),
                             make_atoms(get_numbers(require_key(j, "positions", where), "model.positions"),
                                        get_numbers(require_key(j, "epsilon", where), "model.epsilon"), cap));
      if (j.contains("solution_pairs")) {
        int r = int(get_number(j.at("solution_pairs"), "model.solution_pairs"));
        if (r < 0) throw Error(ErrorKind::Config, "model.solution_pairs must be >= 0");
        doc.solution_pairs = r;
        doc.model.dispersion.pairs = [r](double) { return r; };
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidParam || e.kind() == ErrorKind::UnknownPreset)
      throw Error(ErrorKind::Config, e.what());
    throw;
  }
  return doc;
}

inline json model_to_json(const Model& m) {
  json j;
  if (!m.preset.empty()) {
    j["preset"] = m.preset;
    json p = json::object();
    if (m.preset == "waveguide") {
      p["m"] = m.dispersion.params.at("m");
      p["gamma"] = m.form_factor.params.at("gamma");
    } else {
      p["g"] = m.form_factor.params.at("g");
    }
    j["params"] = p;
  } else {
    j["dispersion"] = {{"expr", m.dispersion.name}, {"params", m.dispersion.params}};
    j["form_factor"] = {{"expr", m.form_factor.name}, {"params", m.form_factor.params}};
  }
  j["positions"] = m.atoms.positions;
  j["epsilon"] = m.atoms.epsilon;
  return j;
}

}  // namespace flee
