//
// Copyright 2026 The covertsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "covertsim/duc.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace covertsim {
namespace {

// Independent brute force: all non-decreasing u in [1, 2^(B-1)]^M.
double brute_force_best(int bits, int m, std::vector<int>* arg) {
  const int hi = 1 << (bits - 1);
  const int order = 1 << bits;
  std::vector<int> u(static_cast<std::size_t>(m), 1);
  double best = -1.0;
  while (true) {
    double worst = 1e300;
    for (int b = 1; b < order; ++b) {
      double prod = 1.0;
      for (int x : u) prod *= std::abs(std::sin(std::numbers::pi * b * x / order));
      worst = std::min(worst, std::pow(prod, 1.0 / m));
    }
    if (worst > best + 1e-12) {
      best = worst;
      *arg = u;
    }
    int k = m - 1;
    while (k >= 0 && u[static_cast<std::size_t>(k)] == hi) --k;
    if (k < 0) break;
    const int v = u[static_cast<std::size_t>(k)] + 1;
    for (int j = k; j < m; ++j) u[static_cast<std::size_t>(j)] = v;
  }
  return best;
}

TEST(DucMatrix, Examples) {
  const DucFactors f1{2, {1}};
  EXPECT_EQ(duc_matrix(0, f1), ComplexMatrix::Identity(1, 1));
  EXPECT_NEAR(std::abs(duc_matrix(1, f1)(0, 0) - Complex(0, 1)), 0.0, 1e-15);

  const DucFactors f2{2, {1, 1}};
  const ComplexMatrix x = duc_matrix(2, f2);
  EXPECT_NEAR(std::abs(x(0, 0) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(x(1, 1) + 1.0), 0.0, 1e-15);
  EXPECT_EQ(x(0, 1), Complex(0, 0));
  EXPECT_THROW(duc_matrix(4, f2), ParameterError);
  EXPECT_THROW(duc_matrix(-1, f2), ParameterError);
}

TEST(DucCodebook, DiagonalUnitary) {
  const Codebook cb = duc_codebook(DucFactors{4, {1, 3, 5}});
  ASSERT_EQ(cb.size(), 16u);
  for (const auto& x : cb.codewords) {
    EXPECT_LT((x.adjoint() * x - ComplexMatrix::Identity(3, 3)).norm(), 1e-12);
    EXPECT_LT((x - ComplexMatrix(x.diagonal().asDiagonal())).norm(), 1e-15);
  }
}

TEST(DucFactors, Feasibility) {
  EXPECT_TRUE((DucFactors{2, {1, 2}}.feasible()));
  EXPECT_FALSE((DucFactors{2, {2, 1}}.feasible()));
  EXPECT_FALSE((DucFactors{2, {1, 3}}.feasible()));
  EXPECT_FALSE((DucFactors{2, {0, 1}}.feasible()));
}

TEST(DiversityProduct, Examples) {
  EXPECT_NEAR(diversity_product(DucFactors{2, {1}}), std::sin(std::numbers::pi / 4), 1e-12);
  EXPECT_NEAR(diversity_product(DucFactors{2, {1, 2}}), 0.0, 1e-15);
  EXPECT_NEAR(diversity_product(DucFactors{2, {1, 1}}), std::sqrt(0.5), 1e-12);
}

TEST(OptimizeFactors, SingletonAndSmall) {
  const DucFactors a = optimize_factors(1, 1);
  EXPECT_EQ(a.u, std::vector<int>{1});
  EXPECT_NEAR(diversity_product(a), 1.0, 1e-15);

  const DucFactors b = optimize_factors(2, 2);
  EXPECT_EQ(b.u, (std::vector<int>{1, 1}));
  EXPECT_NEAR(diversity_product(b), std::sqrt(0.5), 1e-12);
}

TEST(OptimizeFactors, MatchesBruteForceUpToFour) {
  for (int m = 1; m <= 4; ++m) {
    std::vector<int> arg;
    const double best = brute_force_best(m, m, &arg);
    const auto res = optimize_factors_detailed(m, m);
    EXPECT_TRUE(res.exhaustive);
    EXPECT_NEAR(res.diversity_product, best, 1e-12) << "M=" << m;
    EXPECT_EQ(res.factors.u, arg) << "M=" << m;
  }
}

TEST(OptimizeFactors, DominatesRandomFeasible) {
  const double best = diversity_product(optimize_factors(4, 4));
  RandomStream s = derive_stream(77, "u", 0);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> u(4);
    for (int& x : u) x = 1 + static_cast<int>(s.uniform() * 8);
    std::sort(u.begin(), u.end());
    EXPECT_GE(best + 1e-12, diversity_product(DucFactors{4, u}));
  }
}

TEST(OptimizeFactors, RandomRestartsWhenBudgetSmall) {
  const auto res = optimize_factors_detailed(6, 4, 10);
  EXPECT_FALSE(res.exhaustive);
  EXPECT_TRUE(res.factors.feasible());
  EXPECT_NEAR(res.diversity_product, diversity_product(res.factors), 1e-15);
  const auto again = optimize_factors_detailed(6, 4, 10);
  EXPECT_EQ(res.factors, again.factors);
}

}  // namespace
}  // namespace covertsim
