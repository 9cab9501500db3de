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

// Small dense kernels used by the spectral and transport measures. Matrices
// are square, row-major, and small (K x K for K classes), so nothing here is
// blocked or vectorized.

#ifndef MDE_LINALG_HPP_
#define MDE_LINALG_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mde {

struct SquareMatrix {
  std::size_t dim = 0;
  std::vector<double> values;  // dim * dim, row-major

  explicit SquareMatrix(std::size_t d = 0) : dim(d), values(d * d, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return values[r * dim + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return values[r * dim + c];
  }
};

struct SymmetricEigen {
  std::vector<double> eigenvalues;  // ascending
  SquareMatrix eigenvectors;        // column j pairs with eigenvalues[j]
};

// Cyclic Jacobi rotations. Throws kNumeric if the off-diagonal mass has not
// vanished after `max_sweeps`. The input must be symmetric; only the upper
// triangle is trusted.
SymmetricEigen EigenSymmetric(const SquareMatrix& a, int max_sweeps = 100);

SquareMatrix Multiply(const SquareMatrix& a, const SquareMatrix& b);

// Eigenvalues of a PSD matrix at or below kPsdRelativeFloor times the largest
// magnitude are rounding noise and treated as 0. Without this, a rank-deficient
// covariance yields eigenvalues like 1e-14 whose square roots (1e-7) swamp
// the result.
inline constexpr double kPsdRelativeFloor = 1e-12;
double PsdEigenvalueFloor(const std::vector<double>& eigenvalues);

// V * diag(sqrt(lambda)) * V^T with eigenvalues under the floor set to 0.
SquareMatrix SqrtPsd(const SquareMatrix& a);

double Trace(const SquareMatrix& a);

// Bottleneck assignment on an n x n cost matrix (row-major): a perfect
// matching minimizing the largest matched cost. Returns that cost. Exact:
// binary search over the sorted distinct costs with a Hopcroft-Karp
// feasibility check at each threshold.
double BottleneckAssignment(std::span<const double> cost, std::size_t n);

// Does a perfect matching exist using only edges with cost <= threshold?
bool HasPerfectMatching(std::span<const double> cost, std::size_t n,
                        double threshold);

}  // namespace mde

#endif  // MDE_LINALG_HPP_
