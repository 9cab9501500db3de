/*
 * Copyright 2026 The mdeval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "mde/error.hpp"
#include "mde/linalg.hpp"
#include "oracles.hpp"

namespace {

mde::SquareMatrix RandomSpd(std::mt19937_64& rng, std::size_t n, std::size_t rank) {
  std::normal_distribution<double> g;
  std::vector<double> a(n * rank);
  for (double& v : a) v = g(rng);
  mde::SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < rank; ++r) m(i, j) += a[i * rank + r] * a[j * rank + r];
  return m;
}

}  // namespace

TEST_CASE("jacobi eigenvalues match Eigen") {
  std::mt19937_64 rng(21);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 1 + c % 12;
    const auto m = RandomSpd(rng, n, 1 + c % n);
    const auto eig = mde::EigenSymmetric(m);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = m(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e);
    const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(eig.eigenvalues[i] - solver.eigenvalues()(i)) < 1e-12 * scale);
    // A v = lambda v for every column.
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < n; ++r) {
        double av = 0;
        for (std::size_t k = 0; k < n; ++k) av += m(r, k) * eig.eigenvectors(k, j);
        CHECK(std::abs(av - eig.eigenvalues[j] * eig.eigenvectors(r, j)) < 1e-10 * scale);
      }
  }
}

TEST_CASE("psd square root squares back") {
  std::mt19937_64 rng(22);
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 1 + c % 9;
    const auto m = RandomSpd(rng, n, n);
    const auto r = mde::SqrtPsd(m);
    const auto back = mde::Multiply(r, r);
    double scale = 0;
    for (double v : m.values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n * n; ++i) CHECK(std::abs(back.values[i] - m.values[i]) < 1e-10 * scale);
  }
}

TEST_CASE("psd floor zeroes rounding-level eigenvalues") {
  mde::SquareMatrix m(2);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-14;
  const auto r = mde::SqrtPsd(m);
  CHECK(r(0, 0) == doctest::Approx(1.0));
  CHECK(r(1, 1) == 0.0);
  CHECK(mde::PsdEigenvalueFloor({-3.0, 2.0}) == 3.0 * mde::kPsdRelativeFloor);
}

TEST_CASE("trace and multiply") {
  mde::SquareMatrix a(2), b(2);
  a.values = {1, 2, 3, 4};
  b.values = {0, 1, 1, 0};
  CHECK(mde::Multiply(a, b).values == std::vector<double>{2, 1, 4, 3});
  CHECK(mde::Trace(a) == 5.0);
}

TEST_CASE("bottleneck assignment matches permutations") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> coarse(0, 5);
  std::uniform_real_distribution<double> fine(0, 1);
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = 1 + c % 7;
    std::vector<double> cost(n * n);
    for (double& v : cost) v = c % 2 ? coarse(rng) : fine(rng);
    CHECK(mde::BottleneckAssignment(cost, n) == oracle::BottleneckBrute(cost, n));
  }
}

TEST_CASE("matching feasibility") {
  const std::vector<double> cost = {0, 1, 1, 1};
  CHECK(mde::HasPerfectMatching(cost, 2, 1.0));
  CHECK_FALSE(mde::HasPerfectMatching(cost, 2, 0.5));
  CHECK_THROWS_AS(mde::BottleneckAssignment(std::vector<double>{1, 2, 3}, 2), mde::Error);
  CHECK_THROWS_AS(mde::BottleneckAssignment(std::vector<double>{}, 0), mde::Error);
}
