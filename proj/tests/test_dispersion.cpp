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

#include <random>

#include "flee/dispersion.hpp"
#include "oracles.hpp"

using namespace flee;

TEST(Dispersion, RealSolutionsWaveguide) {
  auto wg = waveguide(1.0, 1.0, {0.0}, {1.0});
  auto ks = real_solutions(wg, 2.0);
  ASSERT_EQ(ks.size(), 1u);
  EXPECT_NEAR(ks[0], std::sqrt(3.0), 1e-12);
  EXPECT_TRUE(real_solutions(wg, 0.5).empty());
}

TEST(Dispersion, ComplexSolutionsSatisfyDispersion) {
  auto wg = waveguide(1.0, 1.0, {0.0}, {1.0});
  for (cplx z : {cplx(2.0, 0.3), cplx(0.5, 0.1), cplx(0.2, 2.0)}) {
    auto s = complex_solutions(wg, z);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_LT(std::abs(wg.omega(s.solutions[0]) - z), 1e-10);
    EXPECT_GT(s.solutions[0].imag(), 0.0);
  }
}

TEST(Dispersion, WaveguideHasNoSolutionsLeftOfImaginaryAxis) {
  auto wg = waveguide(1.0, 1.0, {0.0}, {1.0});
  EXPECT_EQ(complex_solutions(wg, cplx(-1.0, 2.0)).size(), 0u);
}

TEST(Dispersion, QuarticHasTwoPairs) {
  auto m = make_model(catalog::quartic({{"c", 1.0}}), catalog::constant_ff({{"g", 1.0}}), make_atoms({0.0}, {1.0}));
  auto s = complex_solutions(m, cplx(1.0, 0.5));
  ASSERT_EQ(s.size(), 2u);
  for (cplx k : s.solutions) EXPECT_LT(std::abs(m.omega(k) - cplx(1.0, 0.5)), 1e-10);
  EXPECT_GT(std::abs(s.solutions[0] - s.solutions[1]), 1e-3);
}

TEST(Dispersion, CriticalPointsOfRelativistic) {
  auto wg = waveguide(1.0, 1.0, {0.0}, {1.0});
  auto cs = critical_points(wg, Rect{-2, 2, -0.5, 0.5});
  ASSERT_EQ(cs.points.size(), 1u);
  EXPECT_LT(std::abs(cs.points[0]), 1e-10);
  EXPECT_NEAR(cs.values[0].real(), 1.0, 1e-10);
  EXPECT_EQ(cs.order[0], 2);
}

TEST(Dispersion, NearCriticalValueRaises) {
  auto wg = waveguide(1.0, 1.0, {0.0}, {1.0});
  try {
    complex_solutions(wg, cplx(1.0, 1e-9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NearCriticalValue);
  }
}

TEST(Dispersion, ImaginaryPartSignPersistsOnRandomPaths) {
  auto wg = waveguide(1.0, 1.0, {0.0}, {1.0});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> re(0.05, 3.0), im(0.05, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    cplx z0(re(rng), im(rng)), z1(re(rng), im(rng));
    auto s = complex_solutions(wg, z0);
    std::vector<cplx> path;
    for (int i = 1; i <= 50; ++i) path.push_back(z0 + (z1 - z0) * (i / 50.0));
    auto p = track_solution(wg, z0, s.solutions[0], path);
    for (cplx k : p.kappa) EXPECT_GT(k.imag(), 0.0);
  }
}

TEST(Dispersion, EquipotentialAlongFixedRealPart) {
  auto m = massless_flat(1.0, {0.0}, {1.0});
  const double E0 = 1.3;
  auto s = complex_solutions(m, cplx(E0, 0.1));
  std::vector<cplx> path;
  for (int i = 1; i <= 100; ++i) path.push_back(cplx(E0, 0.1 + 0.02 * i));
  auto p = track_solution(m, cplx(E0, 0.1), s.solutions[0], path);
  for (double u : p.u) EXPECT_LE(std::abs(u - E0), 1e-9);
}

TEST(Dispersion, SecondSheetComesFromContinuation) {
  auto m = massless_flat(1.0, {0.0}, {1.0});
  auto s = complex_solutions(m, cplx(1.0, -0.2));
  EXPECT_TRUE(s.second_sheet);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_LT(std::abs(s.solutions[0] - std::sqrt(cplx(1.0, -0.2))), 1e-10);
}
