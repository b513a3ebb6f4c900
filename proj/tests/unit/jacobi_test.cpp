// Copyright 2026 The HaloScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "haloscope/jacobi.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

namespace haloscope {
namespace {

TEST(Jacobi, DiagonalInputIsSortedDescending) {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 5.0;
  a(2, 2) = 3.0;
  const auto eig = jacobi_eigen(a);
  EXPECT_EQ(eig.values, (Vector{5.0, 3.0, 1.0}));
  EXPECT_EQ(std::abs(eig.vectors(1, 0)), 1.0);
  EXPECT_EQ(std::abs(eig.vectors(2, 1)), 1.0);
}

TEST(Jacobi, TwoByTwoClosedForm) {
  // [[2,1],[1,2]] has eigenvalues 3 and 1 with vectors (1,1)/sqrt2, (1,-1)/sqrt2.
  const auto eig = jacobi_eigen(Matrix(2, 2, {2, 1, 1, 2}));
  EXPECT_NEAR(eig.values[0], 3.0, 1e-14);
  EXPECT_NEAR(eig.values[1], 1.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.vectors(0, 0)), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(eig.vectors(0, 0) * eig.vectors(1, 0), 0.5, 1e-14);
}

TEST(Jacobi, RandomSymmetricResidualAndOrthogonality) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = testing::random_matrix(30, 12, seed);
    const Matrix a = gram(x);
    const auto eig = jacobi_eigen(a);
    const Matrix av = matmul(a, eig.vectors);
    double scale = eig.values.front();
    for (std::size_t j = 0; j < 12; ++j) {
      if (j > 0) EXPECT_GE(eig.values[j - 1], eig.values[j]);
      for (std::size_t i = 0; i < 12; ++i) {
        EXPECT_NEAR(av(i, j), eig.values[j] * eig.vectors(i, j), 1e-11 * scale);
      }
    }
    const Matrix vtv = matmul(eig.vectors.transposed(), eig.vectors);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(vtv(i, j), i == j ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Jacobi, Deterministic) {
  const Matrix a = gram(testing::random_matrix(20, 9, 3));
  const auto e1 = jacobi_eigen(a);
  const auto e2 = jacobi_eigen(a);
  EXPECT_EQ(e1.values, e2.values);
  EXPECT_EQ(e1.vectors, e2.vectors);
}

TEST(Jacobi, RejectsNonSquare) { EXPECT_THROW(jacobi_eigen(Matrix(2, 3)), std::exception); }

}  // namespace
}  // namespace haloscope
