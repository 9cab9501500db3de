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

// Randomized checks shared by the unit tests and the acceptance runner. Each
// returns the number of failing cases (0 is a pass) and the worst deviation.

#ifndef MDE_TESTS_PROPERTY_CHECKS_HPP_
#define MDE_TESTS_PROPERTY_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "mde/linalg.hpp"
#include "mde/logit_store.hpp"
#include "mde/measures.hpp"
#include "mde/stats.hpp"
#include "oracles.hpp"

namespace checks {

struct Outcome {
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;

  bool ok() const { return failures == 0 && cases > 0; }
  void Record(double deviation, double tolerance) {
    ++cases;
    worst = std::max(worst, deviation);
    if (!(deviation <= tolerance)) ++failures;
  }
  void Record(bool pass) {
    ++cases;
    if (!pass) ++failures;
  }
};

inline mde::LogitStore Rebuild(const mde::LogitStore& s, std::vector<double> logits) {
  std::optional<std::vector<std::uint32_t>> labels;
  if (s.has_labels()) labels.emplace(s.labels().begin(), s.labels().end());
  return mde::LogitStore(s.n_samples(), s.n_classes(), std::move(logits),
                         std::move(labels));
}

// MDE of N copies of one random row equals log N.
inline Outcome MdeIdenticalIsLogN(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(1, 500), kd(2, 12);
  std::uniform_real_distribution<double> u(-30, 30), td(0.05, 50);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = nd(rng), k = kd(rng);
    std::vector<double> row(k);
    for (double& v : row) v = u(rng);
    std::vector<double> logits;
    for (std::size_t i = 0; i < n; ++i) logits.insert(logits.end(), row.begin(), row.end());
    const mde::LogitStore s(n, k, logits, std::nullopt);
    const double got = mde::Mde(s, mde::Temperature(td(rng)));
    out.Record(std::abs(got - std::log(static_cast<double>(n))), 1e-12);
  }
  return out;
}

// Uniform logits have energy -T log K; at T = 1 that is -log K.
inline Outcome UniformEnergyIsMinusLogK(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> kd(2, 1000);
  std::uniform_real_distribution<double> u(-100, 100);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t k = kd(rng);
    const double level = c == 0 ? 0.0 : u(rng);
    const mde::LogitStore s(1, k, std::vector<double>(k, 0.0), std::nullopt);
    const mde::LogitStore lifted(1, k, std::vector<double>(k, level), std::nullopt);
    const double expect = -std::log(static_cast<double>(k));
    out.Record(std::abs(mde::Energy(s)[0] - expect), 1e-12);
    out.Record(std::abs(mde::Energy(lifted)[0] - (expect - level)), 1e-12);
  }
  return out;
}

// Every entry of theorem_gap is <= 0. One case is one store.
inline Outcome TheoremGapNonPositive(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(1, 40), kd(2, 10);
  std::uniform_real_distribution<double> scale(0.01, 200), td(1e-3, 1e3);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto s = oracle::RandomStore(rng, nd(rng), kd(rng), scale(rng));
    const auto gap = mde::TheoremGap(s, mde::Temperature(td(rng)));
    const double worst = *std::max_element(gap.begin(), gap.end());
    out.Record(std::max(worst, 0.0), 0.0);
  }
  return out;
}

inline Outcome NuclearMatchesSvd(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(1, 16), kd(2, 16);
  std::uniform_real_distribution<double> scale(0.1, 10);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto s = oracle::RandomStore(rng, nd(rng), kd(rng), scale(rng), false);
    out.Record(std::abs(mde::NuclearNormScore(s) - oracle::NuclearNorm(s)), 1e-8);
  }
  return out;
}

// Integer-valued draws so ties are common.
inline Outcome SpearmanMatchesBruteRanks(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(2, 40);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = nd(rng);
    std::uniform_int_distribution<int> vd(0, static_cast<int>(n / 2 + 1));
    std::vector<double> x(n), y(n);
    auto fill = [&] {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = vd(rng);
        y[i] = vd(rng);
      }
    };
    auto spread = [](const std::vector<double>& v) {
      return *std::max_element(v.begin(), v.end()) != *std::min_element(v.begin(), v.end());
    };
    do fill();
    while (!spread(x) || !spread(y));
    // Ranks are averages of integers, so both sides see the same doubles; the
    // correlation itself is compared after rounding both to double.
    const bool ranks_equal = mde::AverageRanks(x) == oracle::BruteRanks(x);
    const double got = mde::Spearman(x, y);
    const double want = oracle::Spearman(x, y);
    out.Record(ranks_equal && std::abs(got - want) <= 4 * std::numeric_limits<double>::epsilon());
  }
  return out;
}

inline Outcome CotMatchesPermutations(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(1, 7), kd(2, 5);
  std::uniform_real_distribution<double> scale(0.1, 8);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = nd(rng), k = kd(rng);
    const auto s = oracle::RandomStore(rng, n, k, scale(rng));
    std::vector<double> marginal(k);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    double total = 0;
    for (double& m : marginal) total += (m = w(rng));
    for (double& m : marginal) m /= total;
    const auto counts = mde::LargestRemainderCounts(marginal, n);
    std::vector<std::size_t> classes;
    for (std::size_t j = 0; j < k; ++j) classes.insert(classes.end(), counts[j], j);
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = mde::Softmax(s.row(i));
      for (std::size_t v = 0; v < n; ++v) {
        double d = 0;
        for (std::size_t j = 0; j < k; ++j)
          d = std::max(d, std::abs(p[j] - (j == classes[v] ? 1.0 : 0.0)));
        cost[i * n + v] = d;
      }
    }
    const auto got = mde::CotScore(s, marginal);
    out.Record(!got.approximate && got.value == oracle::BottleneckBrute(cost, n));
  }
  return out;
}

// Diagonal covariances: sum (mu_a - mu_b)^2 + sum (sqrt(s_a) - sqrt(s_b))^2.
inline Outcome FrechetMatchesClosedForms(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> kd(1, 8);
  std::uniform_real_distribution<double> mu(-5, 5), var(0.0, 9.0);
  Outcome out;
  auto make = [](std::vector<double> mean, std::vector<double> diag) {
    mde::FrechetStats s;
    s.mean = std::move(mean);
    s.covariance = mde::SquareMatrix(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) s.covariance(i, i) = diag[i];
    return s;
  };
  // The worked example: means (0,0) and (1,1), diag(1,1) and diag(4,1).
  out.Record(std::abs(mde::FrechetDistance(make({0, 0}, {1, 1}), make({1, 1}, {4, 1})) - 3.0),
             1e-9);
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t k = c % 2 == 0 ? 1 : kd(rng);
    std::vector<double> ma(k), mb(k), sa(k), sb(k);
    long double expect = 0;
    for (std::size_t i = 0; i < k; ++i) {
      ma[i] = mu(rng);
      mb[i] = mu(rng);
      sa[i] = var(rng);
      sb[i] = var(rng);
      const long double dm = ma[i] - mb[i];
      const long double ds = std::sqrt(static_cast<long double>(sa[i])) -
                             std::sqrt(static_cast<long double>(sb[i]));
      expect += dm * dm + ds * ds;
    }
    const double got = mde::FrechetDistance(make(ma, sa), make(mb, sb));
    out.Record(std::abs(got - static_cast<double>(expect)), 1e-9);
  }
  return out;
}

// Adding one constant to every logit leaves MDE unchanged.
inline Outcome MdeGlobalShift(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(1, 200), kd(2, 10);
  std::uniform_real_distribution<double> shift(-50, 50), td(0.1, 10);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto s = oracle::RandomStore(rng, nd(rng), kd(rng), 5.0, false);
    const double a = shift(rng);
    std::vector<double> moved(s.logits().begin(), s.logits().end());
    for (double& v : moved) v += a;
    const mde::Temperature t(td(rng));
    out.Record(std::abs(mde::Mde(s, t) - mde::Mde(Rebuild(s, moved), t)), 1e-10);
  }
  return out;
}

// Reordering samples, or classes within a sample, leaves energies and MDE
// bit-identical.
inline Outcome MdePermutation(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(1, 200), kd(2, 10);
  std::uniform_real_distribution<double> td(0.1, 10);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = nd(rng), k = kd(rng);
    const auto s = oracle::RandomStore(rng, n, k, 5.0, false);
    std::vector<std::size_t> rows(n), cols(k);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::shuffle(cols.begin(), cols.end(), rng);
    std::vector<double> permuted;
    for (std::size_t r : rows)
      for (std::size_t j : cols) permuted.push_back(s.row(r)[j]);
    const auto p = Rebuild(s, permuted);
    const mde::Temperature t(td(rng));
    const auto e0 = mde::Energy(s, t), e1 = mde::Energy(p, t);
    bool same = true;
    for (std::size_t i = 0; i < n; ++i) same = same && e0[rows[i]] == e1[i];
    out.Record(same && mde::Mde(s, t) == mde::Mde(p, t));
  }
  return out;
}

// energy(f + c 1) = energy(f) - c per sample.
inline Outcome EnergyShiftRule(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(1, 50), kd(2, 10);
  std::uniform_real_distribution<double> shift(-20, 20), td(0.1, 10);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = nd(rng), k = kd(rng);
    const auto s = oracle::RandomStore(rng, n, k, 5.0, false);
    std::vector<double> offsets(n), moved(s.logits().begin(), s.logits().end());
    for (std::size_t i = 0; i < n; ++i) {
      offsets[i] = shift(rng);
      for (std::size_t j = 0; j < k; ++j) moved[i * k + j] += offsets[i];
    }
    const mde::Temperature t(td(rng));
    const auto e0 = mde::Energy(s, t), e1 = mde::Energy(Rebuild(s, moved), t);
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(e1[i] - (e0[i] - offsets[i])));
    out.Record(worst, 1e-12);
  }
  return out;
}

// Spearman under strictly increasing maps of either argument, and sign flip
// under decreasing ones.
inline Outcome SpearmanMonotone(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(3, 60);
  std::uniform_real_distribution<double> u(-3, 3);
  std::uniform_int_distribution<int> pick(0, 3);
  Outcome out;
  auto apply = [](int which, double v) {
    switch (which) {
      case 0: return std::exp(v);
      case 1: return v * v * v;
      case 2: return std::atan(v) + 2.0;
      default: return 3.0 * v - 7.0;
    }
  };
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = nd(rng);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::round(u(rng) * 4) / 4;  // some ties
      y[i] = u(rng);
    }
    if (*std::max_element(x.begin(), x.end()) == *std::min_element(x.begin(), x.end())) x[0] += 1;
    const double base = mde::Spearman(x, y);
    std::vector<double> gx(n), gy(n), neg(n);
    const int a = pick(rng), b = pick(rng);
    for (std::size_t i = 0; i < n; ++i) {
      gx[i] = apply(a, x[i]);
      gy[i] = apply(b, y[i]);
      neg[i] = -apply(a, x[i]);
    }
    // Ranks of the transformed data are identical, so the result is too.
    out.Record(mde::Spearman(gx, gy) == base && mde::Spearman(neg, y) == -base);
  }
  return out;
}

// |atc(source) - acc(source)| <= 1/N after calibrating on that source. The
// worst deviation is reported in samples.
inline Outcome AtcSelfConsistency(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nd(2, 1000), kd(2, 10);
  std::uniform_real_distribution<double> scale(0.1, 10);
  Outcome out;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = nd(rng);
    const auto s = oracle::RandomStore(rng, n, kd(rng), scale(rng));
    const auto th = mde::AtcCalibrate(s);
    // Both scores are k/N; comparing the counts keeps 1/N exact.
    const double count = static_cast<double>(n);
    const double d = std::abs(std::round(mde::AtcScore(s, th) * count) -
                              std::round(mde::TrueAccuracy(s) * count));
    out.Record(d, 1.0);
  }
  return out;
}

}  // namespace checks

#endif  // MDE_TESTS_PROPERTY_CHECKS_HPP_
