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

#include "mde/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mde/error.hpp"

namespace mde {

namespace {

double SortedSum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

}  // namespace

Temperature::Temperature(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0)
    throw Error(ErrorCode::kInvalidArgument,
                "temperature must be a positive finite number");
}

double LogSumExp(std::span<const double> values) {
  return LogSumExpScaled(values, 1.0);
}

double LogSumExpScaled(std::span<const double> values, double inv_scale) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : values) max = std::max(max, v * inv_scale);
  // Terms are summed smallest first so the result ignores input order.
  std::vector<double> terms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    terms[i] = std::exp(values[i] * inv_scale - max);
  return max + std::log(SortedSum(terms));
}

EnergyVector Energy(const LogitStore& store, Temperature t) {
  const double temp = t.value();
  EnergyVector out(store.n_samples());
  for (std::size_t i = 0; i < store.n_samples(); ++i)
    out[i] = -temp * LogSumExpScaled(store.row(i), 1.0 / temp);
  return out;
}

double MdeFromEnergies(std::span<const double> energies) {
  if (energies.empty())
    throw Error(ErrorCode::kInvalidArgument, "MDE of an empty dataset");
  // -(1/N) sum_n [Z_n - LSE(Z)] = LSE(Z) - mean(Z)
  const double lse = LogSumExp(energies);
  std::vector<double> gaps(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) gaps[i] = lse - energies[i];
  return SortedSum(gaps) / static_cast<double>(energies.size());
}

double Mde(const LogitStore& store, Temperature t) {
  return MdeFromEnergies(Energy(store, t));
}

double AvgEnergy(const LogitStore& store, Temperature t) {
  const auto energies = Energy(store, t);
  return std::accumulate(energies.begin(), energies.end(), 0.0) /
         static_cast<double>(energies.size());
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double lse = LogSumExp(logits);
  std::vector<double> p(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j)
    p[j] = std::exp(logits[j] - lse);
  return p;
}

double ConfScore(const LogitStore& store) {
  double total = 0.0;
  for (std::size_t i = 0; i < store.n_samples(); ++i) {
    const auto row = store.row(i);
    // max_j softmax_j = exp(max f - LSE(f))
    const double max = *std::max_element(row.begin(), row.end());
    total += std::exp(max - LogSumExp(row));
  }
  return total / static_cast<double>(store.n_samples());
}

std::vector<double> NegativeEntropies(const LogitStore& store) {
  std::vector<double> out(store.n_samples());
  for (std::size_t i = 0; i < store.n_samples(); ++i) {
    const auto row = store.row(i);
    const double lse = LogSumExp(row);
    double s = 0.0;
    for (double f : row) {
      const double log_p = f - lse;
      const double p = std::exp(log_p);
      if (p > 0.0) s += p * log_p;
    }
    out[i] = s;
  }
  return out;
}

double EntropyScore(const LogitStore& store) {
  const auto scores = NegativeEntropies(store);
  return std::accumulate(scores.begin(), scores.end(), 0.0) /
         static_cast<double>(scores.size());
}

AtcThreshold AtcCalibrate(const LogitStore& source) {
  auto labels = source.labels();
  if (source.n_samples() < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "ATC calibration needs at least two source samples");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < source.n_samples(); ++i)
    if (Argmax(source.row(i)) != labels[i]) ++errors;

  auto scores = NegativeEntropies(source);
  std::sort(scores.begin(), scores.end());
  AtcThreshold th;
  if (errors == 0) {
    th.t = std::nextafter(scores.front(),
                          -std::numeric_limits<double>::infinity());
  } else if (errors == source.n_samples()) {
    th.t = std::nextafter(scores.back(),
                          std::numeric_limits<double>::infinity());
  } else {
    // ceil(err * N) - 1 with err * N == errors exactly.
    th.t = scores[errors - 1];
  }
  return th;
}

double AtcScore(const LogitStore& target, const AtcThreshold& threshold) {
  const auto scores = NegativeEntropies(target);
  std::size_t above = 0;
  for (double s : scores)
    if (s >= threshold.t) ++above;
  return static_cast<double>(above) / static_cast<double>(scores.size());
}

double NuclearNormScore(const LogitStore& store) {
  const std::size_t n = store.n_samples(), k = store.n_classes();
  SquareMatrix gram(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = Softmax(store.row(i));
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = r; c < k; ++c) gram(r, c) += p[r] * p[c];
  }
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < r; ++c) gram(r, c) = gram(c, r);
  const auto eig = EigenSymmetric(gram);
  double nuclear = 0.0;
  for (double lambda : eig.eigenvalues) nuclear += std::sqrt(std::max(lambda, 0.0));
  return nuclear / std::sqrt(static_cast<double>(std::min(n, k)) *
                             static_cast<double>(n));
}

FrechetStats ComputeFrechetStats(const LogitStore& store) {
  const std::size_t n = store.n_samples(), k = store.n_classes();
  if (n < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "Frechet statistics need at least two samples");
  FrechetStats stats;
  stats.mean.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = store.row(i);
    for (std::size_t j = 0; j < k; ++j) stats.mean[j] += row[j];
  }
  for (double& m : stats.mean) m /= static_cast<double>(n);
  stats.covariance = SquareMatrix(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = store.row(i);
    for (std::size_t r = 0; r < k; ++r) {
      const double dr = row[r] - stats.mean[r];
      for (std::size_t c = r; c < k; ++c)
        stats.covariance(r, c) += dr * (row[c] - stats.mean[c]);
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = r; c < k; ++c) {
      stats.covariance(r, c) /= denom;
      stats.covariance(c, r) = stats.covariance(r, c);
    }
  return stats;
}

double FrechetDistance(const FrechetStats& a, const FrechetStats& b) {
  const std::size_t k = a.mean.size();
  if (b.mean.size() != k || a.covariance.dim != k || b.covariance.dim != k)
    throw Error(ErrorCode::kShapeMismatch,
                "Frechet statistics of different dimension");
  double mean_term = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double d = a.mean[j] - b.mean[j];
    mean_term += d * d;
  }
  const SquareMatrix root_a = SqrtPsd(a.covariance);
  SquareMatrix inner = Multiply(Multiply(root_a, b.covariance), root_a);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = r + 1; c < k; ++c) {
      const double sym = 0.5 * (inner(r, c) + inner(c, r));
      inner(r, c) = inner(c, r) = sym;
    }
  const auto eig = EigenSymmetric(inner);
  const double floor = PsdEigenvalueFloor(eig.eigenvalues);
  double cross = 0.0;
  for (double lambda : eig.eigenvalues)
    if (lambda > floor) cross += std::sqrt(lambda);
  const double fd =
      mean_term + Trace(a.covariance) + Trace(b.covariance) - 2.0 * cross;
  if (fd < 0.0 && fd >= -1e-8) return 0.0;
  if (fd < 0.0)
    throw Error(ErrorCode::kNumeric,
                "Frechet distance is negative beyond round-off");
  return fd;
}

std::vector<std::size_t> LargestRemainderCounts(std::span<const double> marginal,
                                                std::size_t n) {
  std::vector<std::size_t> counts(marginal.size());
  std::vector<double> remainder(marginal.size());
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < marginal.size(); ++j) {
    const double exact = marginal[j] * static_cast<double>(n);
    counts[j] = static_cast<std::size_t>(std::floor(exact));
    remainder[j] = exact - static_cast<double>(counts[j]);
    assigned += counts[j];
  }
  std::vector<std::size_t> order(marginal.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned)
    ++counts[order[i % order.size()]];
  while (assigned > n) {  // only reachable through round-off in the floors
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  return counts;
}

std::vector<double> LabelMarginal(const LogitStore& store) {
  auto labels = store.labels();
  std::vector<double> marginal(store.n_classes(), 0.0);
  for (auto label : labels) marginal[label] += 1.0;
  for (double& m : marginal) m /= static_cast<double>(store.n_samples());
  return marginal;
}

namespace {

// L-infinity distance between a probability vector and the one-hot e_c.
double OneHotDistance(std::span<const double> p, std::size_t c) {
  double d = 1.0 - p[c];
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != c) d = std::max(d, p[j]);
  return d;
}

}  // namespace

CotResult CotScore(const LogitStore& target,
                   std::span<const double> source_label_marginal) {
  const std::size_t n = target.n_samples(), k = target.n_classes();
  if (source_label_marginal.size() != k)
    throw Error(ErrorCode::kInvalidArgument,
                "source label marginal has " +
                    std::to_string(source_label_marginal.size()) +
                    " entries, expected " + std::to_string(k));
  double sum = 0.0;
  for (double m : source_label_marginal) {
    if (!std::isfinite(m) || m < 0.0)
      throw Error(ErrorCode::kInvalidArgument,
                  "source label marginal has a negative or non-finite entry");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::kInvalidArgument,
                "source label marginal does not sum to 1");

  const auto counts = LargestRemainderCounts(source_label_marginal, n);
  // dist[i * k + c] = ||p_i - e_c||_inf
  std::vector<double> dist(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = Softmax(target.row(i));
    for (std::size_t c = 0; c < k; ++c) dist[i * k + c] = OneHotDistance(p, c);
  }

  CotResult result;
  if (n <= kCotExactLimit) {
    std::vector<std::size_t> column_class;
    column_class.reserve(n);
    for (std::size_t c = 0; c < k; ++c)
      column_class.insert(column_class.end(), counts[c], c);
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cost[i * n + j] = dist[i * k + column_class[j]];
    result.value = BottleneckAssignment(cost, n);
    return result;
  }

  // Greedy: walk (sample, class) pairs by increasing cost, taking a pair
  // whenever the sample is free and the class still has capacity. Identical
  // to greedy on the expanded n x n matrix because columns of one class share
  // their costs.
  std::vector<std::size_t> order(n * k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<bool> used(n, false);
  std::vector<std::size_t> remaining = counts;
  std::size_t matched = 0;
  double worst = 0.0;
  for (std::size_t idx : order) {
    const std::size_t i = idx / k, c = idx % k;
    if (used[i] || remaining[c] == 0) continue;
    used[i] = true;
    --remaining[c];
    worst = std::max(worst, dist[idx]);
    if (++matched == n) break;
  }
  result.value = worst;
  result.approximate = true;
  return result;
}

double AgreeScore(const LogitStore& a, const LogitStore& b) {
  if (a.n_samples() != b.n_samples() || a.n_classes() != b.n_classes())
    throw Error(ErrorCode::kShapeMismatch,
                "agreement needs stores of identical shape");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.n_samples(); ++i)
    if (Argmax(a.row(i)) == Argmax(b.row(i))) ++same;
  return static_cast<double>(same) / static_cast<double>(a.n_samples());
}

std::vector<double> TheoremGap(const LogitStore& store, Temperature t) {
  auto labels = store.labels();
  const double inv = 1.0 / t.value();
  std::vector<double> out(store.n_samples());
  for (std::size_t i = 0; i < store.n_samples(); ++i) {
    const auto row = store.row(i);
    // Clamp the rounding of f_y/T - LSE(f/T) when the true class dominates.
    out[i] = std::min(0.0, row[labels[i]] * inv - LogSumExpScaled(row, inv));
  }
  return out;
}

namespace {

struct NamedMeasure {
  MeasureId id;
  std::string_view name;
};

constexpr NamedMeasure kMeasureNames[] = {
    {MeasureId::kMde, "mde"},         {MeasureId::kAvgEnergy, "avg_energy"},
    {MeasureId::kConf, "conf"},       {MeasureId::kEntropy, "entropy"},
    {MeasureId::kAtc, "atc"},         {MeasureId::kNuclear, "nuclear"},
    {MeasureId::kFrechet, "frechet"}, {MeasureId::kCot, "cot"},
    {MeasureId::kAgree, "agree"},     {MeasureId::kProjNorm, "projnorm"},
};

}  // namespace

std::string_view MeasureName(MeasureId id) {
  for (const auto& m : kMeasureNames)
    if (m.id == id) return m.name;
  return "unknown";
}

MeasureId ParseMeasureId(std::string_view name) {
  for (const auto& m : kMeasureNames)
    if (m.name == name) return m.id;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown measure '" + std::string(name) + "'");
}

const std::vector<MeasureId>& AllMeasureIds() {
  static const std::vector<MeasureId> ids = [] {
    std::vector<MeasureId> out;
    for (const auto& m : kMeasureNames) out.push_back(m.id);
    return out;
  }();
  return ids;
}

bool NeedsAuxiliary(MeasureId id) {
  return id == MeasureId::kAtc || id == MeasureId::kFrechet ||
         id == MeasureId::kCot || id == MeasureId::kAgree;
}

MeasureValue ComputeMeasure(MeasureId id, const LogitStore& target,
                            const LogitStore* aux, Temperature t) {
  if (NeedsAuxiliary(id) && aux == nullptr)
    throw Error(ErrorCode::kMissingInput,
                "measure '" + std::string(MeasureName(id)) +
                    "' needs an auxiliary --source store");
  switch (id) {
    case MeasureId::kMde: return {Mde(target, t)};
    case MeasureId::kAvgEnergy: return {AvgEnergy(target, t)};
    case MeasureId::kConf: return {ConfScore(target)};
    case MeasureId::kEntropy: return {EntropyScore(target)};
    case MeasureId::kAtc: return {AtcScore(target, AtcCalibrate(*aux))};
    case MeasureId::kNuclear: return {NuclearNormScore(target)};
    case MeasureId::kFrechet:
      return {FrechetDistance(ComputeFrechetStats(*aux),
                              ComputeFrechetStats(target))};
    case MeasureId::kCot: {
      if (aux->n_classes() != target.n_classes())
        throw Error(ErrorCode::kShapeMismatch,
                    "source and target have different class counts");
      const auto r = CotScore(target, LabelMarginal(*aux));
      return {r.value, r.approximate};
    }
    case MeasureId::kAgree: return {AgreeScore(target, *aux)};
    case MeasureId::kProjNorm:
      throw Error(ErrorCode::kMissingInput,
                  "projnorm retrains a classifier and needs features; it is "
                  "only available through the synthetic pipeline");
  }
  throw Error(ErrorCode::kInvalidArgument, "unhandled measure");
}

}  // namespace mde
