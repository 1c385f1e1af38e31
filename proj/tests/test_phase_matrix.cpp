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

#include "flee/phase_matrix.hpp"
#include "oracles.hpp"

using namespace flee;

namespace {
std::vector<double> random_positions(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> gap(0.2, 2.0);
  std::vector<double> x{0.0};
  while (x.size() < n) x.push_back(x.back() + gap(rng));
  return x;
}
}  // namespace

TEST(PhaseMatrix, RecurrenceMatchesCofactorDeterminant) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int d = 0; d < 10; ++d) {
      auto x = random_positions(rng, n);
      cplx kappa(u(rng), std::abs(u(rng)) * 0.3), lambda(u(rng), u(rng));
      cplx want = oracle::det(oracle::phase(x, kappa, lambda));
      EXPECT_LT(std::abs(char_poly(x, lambda, kappa).value - want), 1e-10 * (1.0 + std::abs(want)));
      cplx d0 = oracle::det(oracle::phase(x, kappa));
      EXPECT_LT(std::abs(det_closed(x, kappa) - d0), 1e-10 * (1.0 + std::abs(d0)));
    }
  }
}

TEST(PhaseMatrix, KnownValues) {
  EXPECT_LT(std::abs(char_poly({0, 1, 2}, 1.0, pi / 2).value - 2.0), 1e-12);
  EXPECT_LT(std::abs(det_closed({0, 1, 2}, pi / 2) - 4.0), 1e-12);
  auto [C, S] = cosine_sine_split({0.0, 1.0}, pi / 2, 0.0);
  EXPECT_NEAR(C(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(S(0, 1), 1.0, 1e-15);
  EXPECT_EQ(C.trace(), 2.0);
  EXPECT_EQ(S.trace(), 0.0);
}

TEST(PhaseMatrix, LatticeDegeneracyAtPi) {
  auto s = eigenvalues({0, 1, 2}, pi, true);
  std::vector<double> re;
  for (cplx l : s.eigenvalues) re.push_back(l.real());
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], 0.0, 1e-8);
  EXPECT_NEAR(re[1], 0.0, 1e-8);
  EXPECT_NEAR(re[2], 3.0, 1e-8);
  CMatrix P = phase_matrix({0, 1, 2}, pi);
  auto sv = singular_values(P);
  EXPECT_EQ((sv.array() < 1e-8).count(), 2);
}

TEST(PhaseMatrix, SpectrumTraceAndBox) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> k(0.0, 50.0);
  for (std::size_t n = 2; n <= 5; ++n) {
    auto x = random_positions(rng, n);
    for (int d = 0; d < 10; ++d) {
      double kk = k(rng);
      auto ev = rotated_eigenvalues(x, kk, 0.0);
      cplx sum = 0.0;
      for (cplx l : ev) {
        sum += l;
        EXPECT_GE(-l.imag(), -1e-9);
        EXPECT_LE(-l.imag(), double(n) + 1e-9);
      }
      EXPECT_LT(std::abs(sum + I * double(n)), 1e-9);
    }
  }
}

TEST(PhaseMatrix, EtaCollapse) {
  const std::vector<double> x{0.0, 1.0, 1.1};
  for (double eta : {0.5, 1.0, 3.0})
    for (double k = 0.0; k < 20.0; k += 0.37)
      for (cplx l : rotated_eigenvalues(x, k, eta)) EXPECT_LE(std::abs(l + I), 2.0 * std::exp(-eta * 0.1) + 1e-12);
}

TEST(PhaseMatrix, TwoAtomTrajectoryClosedForm) {
  auto tr = trajectory_sweep({0.0, 1.0}, 0.0, 2 * pi, 0.05, 0.0);
  for (std::size_t i = 0; i < tr.k.size(); ++i) {
    std::vector<cplx> want{-I * (1.0 + std::exp(I * tr.k[i])), -I * (1.0 - std::exp(I * tr.k[i]))};
    EXPECT_LT(multiset_distance(tr.branches[i], want), 1e-10);
  }
  // k -> k + pi swaps the two branches, so the multiset repeats with period pi.
  EXPECT_NEAR(*trajectory_period({0.0, 1.0}), pi, 1e-12);
}

TEST(PhaseMatrix, ClosureAndNonClosure) {
  std::vector<double> ks;
  for (int i = 0; i < 100; ++i) ks.push_back(0.137 * i);
  auto P = trajectory_period({0.0, 1.0, 1.5});
  ASSERT_TRUE(P.has_value());
  EXPECT_NEAR(*P, 2 * pi, 1e-12);
  EXPECT_LT(closure_defect({0.0, 1.0, 1.5}, *P, ks), 1e-6);
  const std::vector<double> irr{0.0, 1.0, 1.0 + 1.0 / std::sqrt(2.0)};
  EXPECT_FALSE(trajectory_period(irr).has_value());
  EXPECT_GT(closure_defect(irr, 2 * pi, ks), 1e-3);
}

TEST(PhaseMatrix, SingleAtomIsConstant) {
  auto tr = trajectory_sweep({0.0}, 0.0, 10.0, 0.5, 0.0);
  for (const auto& b : tr.branches) EXPECT_LT(std::abs(b[0] + I), 1e-14);
}

TEST(PhaseMatrix, EigenvectorsSpanNullspaceAtResonance) {
  auto s = eigenvalues({0, 1, 2}, pi, true);
  CMatrix P = phase_matrix({0, 1, 2}, pi);
  for (Eigen::Index c = 0; c < s.eigenvectors.cols(); ++c) {
    CVector v = s.eigenvectors.col(c);
    EXPECT_LT((P * v - s.eigenvalues[c] * v).norm(), 1e-8);
  }
}
