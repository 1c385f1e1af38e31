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
#include <gtest/gtest.h>

#include "flee/model.hpp"
#include "flee/model_json.hpp"
#include "flee/validation.hpp"
#include "oracles.hpp"

using namespace flee;

TEST(Model, PresetsEvaluate) {
  auto wg = waveguide(1.0, 2 * pi, {0.0, 1.0}, {1.0, 1.0});
  EXPECT_NEAR(wg.omega(0.0).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(wg.omega(std::sqrt(3.0)) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(wg.G(0.0).real(), 1.0, 1e-15);
  auto ml = massless_flat(0.5, {0.0}, {1.0});
  EXPECT_NEAR(std::abs(ml.omega(2.0) - 4.0), 0.0, 1e-15);
  EXPECT_NEAR(ml.G(3.0).real(), 0.25 / (2 * pi), 1e-16);
  EXPECT_TRUE(ml.entire());
  EXPECT_FALSE(wg.entire());
}

TEST(Model, CouplingMatrixIsHermitianRankOne) {
  auto wg = waveguide(1.0, 1.0, {0.0, 0.7, 2.0}, {1, 1, 1});
  for (double k : {-3.0, -0.2, 0.0, 1.5}) {
    CMatrix G = coupling_matrix(wg, k);
    EXPECT_LT(max_abs(G - G.adjoint()), 1e-15);
    EXPECT_LT(max_abs(coupling_matrix(wg, -k) - G.transpose()), 1e-15);
    auto sv = singular_values(G);
    EXPECT_LT(sv(1), 1e-14 * sv(0));
  }
}

TEST(Model, DistancesAreDistinctAndIndexed) {
  auto m = massless_flat(1.0, {0.0, 1.0, 2.0}, {1, 1, 1});
  auto ds = m.distances();
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds[0], 0.0);
  EXPECT_DOUBLE_EQ(m.max_distance(), 2.0);
}

TEST(Model, RejectsBadInput) {
  EXPECT_THROW(preset("nope", {}, {0.0}, {1.0}), Error);
  EXPECT_THROW(waveguide(-1.0, 1.0, {0.0}, {1.0}), Error);
  EXPECT_THROW(waveguide(1.0, 0.0, {0.0}, {1.0}), Error);
  EXPECT_THROW(massless_flat(1.0, {1.0, 0.0}, {1, 1}), Error);
  EXPECT_THROW(massless_flat(1.0, {0.0, 1.0}, {1}), Error);
  EXPECT_THROW(massless_flat(1.0, {0.0, NAN}, {1, 1}), Error);
  EXPECT_NO_THROW(massless_flat(0.0, {0.0}, {1.0}));
}

TEST(ModelJson, RoundTripPresetAndCustom) {
  json j = json::parse(R"({"preset":"waveguide","params":{"m":1,"gamma":2},"positions":[0,1],"epsilon":[1,1.5]})");
  auto doc = model_from_json(j);
  auto back = model_from_json(model_to_json(doc.model));
  EXPECT_EQ(model_to_json(back.model), model_to_json(doc.model));
  json c = json::parse(R"({"dispersion":{"expr":"quartic","params":{"c":1}},"form_factor":{"expr":"gaussian","params":{"g":1,"s":0.5}},
                          "positions":[0],"epsilon":[1]})");
  auto cd = model_from_json(c);
  EXPECT_EQ(cd.model.dispersion.pairs(1.0), 2);
}

TEST(ModelJson, UnknownKeysAreConfigErrors) {
  auto expect_config = [](const char* text) {
    try {
      model_from_json(json::parse(text));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config) << text;
    }
  };
  expect_config(R"({"preset":"waveguide","params":{"m":1,"gamma":2},"positions":[0],"epsilon":[1],"extra":1})");
  expect_config(R"({"preset":"waveguide","params":{"m":1,"gamma":2,"q":1},"positions":[0],"epsilon":[1]})");
  expect_config(R"({"preset":"moon","params":{},"positions":[0],"epsilon":[1]})");
  expect_config(R"({"preset":"waveguide","params":{"m":1},"positions":[0],"epsilon":[1]})");
}

TEST(Validation, WaveguidePassesWithNormalization) {
  auto wg = waveguide(1.0, 2 * pi, {0.0}, {1.0});
  auto rep = validate_hypotheses(wg);
  EXPECT_TRUE(rep.all_pass());
  ASSERT_TRUE(rep.norm_omega.converged);
  EXPECT_NEAR(rep.norm_omega.value, pi, 1e-8);
}

TEST(Validation, MasslessPassesWithEntireNote) {
  auto rep = validate_hypotheses(massless_flat(1.0, {0.0}, {1.0}));
  EXPECT_TRUE(rep.all_pass());
  EXPECT_FALSE(rep.norm_omega.converged);
  bool note = false;
  for (const auto& s : rep.notes) note |= s.find("entire: contour term identically zero") != std::string::npos;
  EXPECT_TRUE(note);
}

TEST(Validation, OddDispersionFailsEvenness) {
  auto m = make_model(catalog::linear({{"c", 1.0}}), catalog::constant_ff({{"g", 1.0}}), make_atoms({0.0}, {1.0}));
  auto rep = validate_hypotheses(m);
  EXPECT_FALSE(rep.all_pass());
  EXPECT_FALSE(rep.check("H2").pass);
}

TEST(Validation, GaussianFormFactorFailsDecay) {
  auto m = make_model(catalog::quadratic({{"c", 1.0}}), catalog::gaussian_ff({{"g", 1.0}, {"s", 1.0}}), make_atoms({0.0}, {1.0}));
  EXPECT_FALSE(validate_hypotheses(m).check("H4").pass);
}
