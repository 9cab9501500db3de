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

#include "mde/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "mde/error.hpp"

namespace mde {

SymmetricEigen EigenSymmetric(const SquareMatrix& input, int max_sweeps) {
  const std::size_t n = input.dim;
  SquareMatrix a(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) a(r, c) = a(c, r) = input(r, c);
  SquareMatrix v(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (double x : a.values) scale = std::max(scale, std::abs(x));

  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r + 1; c < n; ++c) s += a(r, c) * a(r, c);
    return std::sqrt(s);
  };

  const double tol = std::numeric_limits<double>::epsilon() * scale *
                     static_cast<double>(n);
  bool converged = n < 2 || scale == 0.0;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    if (off_diagonal() <= tol) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rutishauser's formulation of the 2x2 rotation.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    if (off_diagonal() <= tol) converged = true;
  }
  if (!converged)
    throw Error(ErrorCode::kNumeric,
                "symmetric eigendecomposition did not converge in " +
                    std::to_string(max_sweeps) + " sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors = SquareMatrix(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k)
      out.eigenvectors(k, j) = v(k, order[j]);
  }
  return out;
}

SquareMatrix Multiply(const SquareMatrix& a, const SquareMatrix& b) {
  const std::size_t n = a.dim;
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

double PsdEigenvalueFloor(const std::vector<double>& eigenvalues) {
  double largest = 0.0;
  for (double v : eigenvalues) largest = std::max(largest, std::abs(v));
  return kPsdRelativeFloor * largest;
}

SquareMatrix SqrtPsd(const SquareMatrix& a) {
  const auto eig = EigenSymmetric(a);
  const std::size_t n = a.dim;
  const double floor = PsdEigenvalueFloor(eig.eigenvalues);
  SquareMatrix out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lambda = eig.eigenvalues[j];
    const double root = lambda > floor ? std::sqrt(lambda) : 0.0;
    if (root == 0.0) continue;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        out(r, c) += root * eig.eigenvectors(r, j) * eig.eigenvectors(c, j);
  }
  return out;
}

double Trace(const SquareMatrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < a.dim; ++i) t += a(i, i);
  return t;
}

namespace {

// Hopcroft-Karp over the threshold graph of a dense cost matrix.
class ThresholdMatcher {
 public:
  ThresholdMatcher(std::span<const double> cost, std::size_t n, double threshold)
      : cost_(cost), n_(n), threshold_(threshold),
        match_left_(n, kNone), match_right_(n, kNone), dist_(n) {}

  std::size_t MaxMatching() {
    std::size_t matched = 0;
    while (Bfs()) {
      for (std::size_t u = 0; u < n_; ++u)
        if (match_left_[u] == kNone && Dfs(u)) ++matched;
    }
    return matched;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  static constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

  bool Edge(std::size_t u, std::size_t v) const {
    return cost_[u * n_ + v] <= threshold_;
  }

  bool Bfs() {
    std::queue<std::size_t> queue;
    bool found_free = false;
    for (std::size_t u = 0; u < n_; ++u) {
      if (match_left_[u] == kNone) {
        dist_[u] = 0;
        queue.push(u);
      } else {
        dist_[u] = kInf;
      }
    }
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop();
      for (std::size_t v = 0; v < n_; ++v) {
        if (!Edge(u, v)) continue;
        const std::size_t w = match_right_[v];
        if (w == kNone) {
          found_free = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          queue.push(w);
        }
      }
    }
    return found_free;
  }

  bool Dfs(std::size_t u) {
    for (std::size_t v = 0; v < n_; ++v) {
      if (!Edge(u, v)) continue;
      const std::size_t w = match_right_[v];
      if (w == kNone || (dist_[w] == dist_[u] + 1 && Dfs(w))) {
        match_left_[u] = v;
        match_right_[v] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  std::span<const double> cost_;
  std::size_t n_;
  double threshold_;
  std::vector<std::size_t> match_left_, match_right_, dist_;
};

}  // namespace

bool HasPerfectMatching(std::span<const double> cost, std::size_t n,
                        double threshold) {
  if (cost.size() != n * n)
    throw Error(ErrorCode::kShapeMismatch, "cost matrix is not n x n");
  // Every row and column needs at least one admissible edge.
  for (std::size_t u = 0; u < n; ++u) {
    bool row_ok = false, col_ok = false;
    for (std::size_t v = 0; v < n && !(row_ok && col_ok); ++v) {
      row_ok = row_ok || cost[u * n + v] <= threshold;
      col_ok = col_ok || cost[v * n + u] <= threshold;
    }
    if (!row_ok || !col_ok) return false;
  }
  return ThresholdMatcher(cost, n, threshold).MaxMatching() == n;
}

double BottleneckAssignment(std::span<const double> cost, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty cost matrix");
  if (cost.size() != n * n)
    throw Error(ErrorCode::kShapeMismatch, "cost matrix is not n x n");
  std::vector<double> candidates(cost.begin(), cost.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  // The answer is at least the largest row minimum and column minimum.
  double lower = -std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < n; ++u) {
    double row_min = std::numeric_limits<double>::infinity();
    double col_min = row_min;
    for (std::size_t v = 0; v < n; ++v) {
      row_min = std::min(row_min, cost[u * n + v]);
      col_min = std::min(col_min, cost[v * n + u]);
    }
    lower = std::max({lower, row_min, col_min});
  }
  std::size_t lo =
      std::lower_bound(candidates.begin(), candidates.end(), lower) -
      candidates.begin();
  std::size_t hi = candidates.size() - 1;  // the full graph always matches
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (HasPerfectMatching(cost, n, candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

}  // namespace mde
