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

#include "mde/synth_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mde/error.hpp"
#include "mde/measures.hpp"
#include "mde/rng.hpp"

namespace mde {

void Validate(const MixtureSpec& spec) {
  if (spec.n_classes < 2)
    throw Error(ErrorCode::kInvalidArgument, "mixture needs at least 2 classes");
  if (spec.dim < 1)
    throw Error(ErrorCode::kInvalidArgument, "mixture dimension must be >= 1");
  if (spec.means.size() != spec.n_classes * spec.dim)
    throw Error(ErrorCode::kInvalidArgument,
                "mixture means must be n_classes x dim");
  for (double m : spec.means)
    if (!std::isfinite(m))
      throw Error(ErrorCode::kInvalidArgument, "mixture mean is not finite");
  if (!std::isfinite(spec.covariance_scale) || spec.covariance_scale <= 0.0)
    throw Error(ErrorCode::kInvalidArgument,
                "covariance_scale must be positive and finite");
  for (std::size_t a = 0; a < spec.n_classes; ++a)
    for (std::size_t b = a + 1; b < spec.n_classes; ++b)
      if (std::equal(spec.means.begin() + a * spec.dim,
                     spec.means.begin() + (a + 1) * spec.dim,
                     spec.means.begin() + b * spec.dim))
        throw Error(ErrorCode::kInvalidArgument,
                    "classes " + std::to_string(a) + " and " +
                        std::to_string(b) + " share a mean");
}

FeatureSet Generate(const MixtureSpec& spec, std::size_t n) {
  Validate(spec);
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "generate: n must be >= 1");
  FeatureSet out;
  out.n = n;
  out.dim = spec.dim;
  out.n_classes = spec.n_classes;
  out.x.resize(n * spec.dim);
  out.labels.resize(n);
  CounterRng rng(spec.seed);
  const double sd = std::sqrt(spec.covariance_scale);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::uint32_t>(i % spec.n_classes);
    out.labels[i] = label;
    for (std::size_t j = 0; j < spec.dim; ++j)
      out.x[i * spec.dim + j] = spec.means[label * spec.dim + j] + sd * rng.Normal();
  }
  return out;
}

std::size_t MappedDim(const FeatureMap& map, std::size_t input_dim) {
  return map.kind == FeatureMap::Kind::kIdentity ? input_dim : map.n_features;
}

std::vector<double> ApplyFeatureMap(const FeatureMap& map,
                                    const std::vector<double>& x,
                                    std::size_t n, std::size_t input_dim) {
  if (x.size() != n * input_dim)
    throw Error(ErrorCode::kShapeMismatch, "feature matrix is not n x dim");
  if (map.kind == FeatureMap::Kind::kIdentity) return x;
  if (map.n_features == 0)
    throw Error(ErrorCode::kInvalidArgument,
                "random Fourier map needs n_features >= 1");
  if (!std::isfinite(map.bandwidth) || map.bandwidth <= 0.0)
    throw Error(ErrorCode::kInvalidArgument,
                "random Fourier bandwidth must be positive");
  const std::size_t d_out = map.n_features;
  CounterRng rng(map.seed);
  std::vector<double> w(d_out * input_dim), phase(d_out);
  for (double& v : w) v = rng.Normal() / map.bandwidth;
  for (double& v : phase) v = 2.0 * std::numbers::pi * rng.Uniform();
  const double amp = std::sqrt(2.0 / static_cast<double>(d_out));
  std::vector<double> out(n * d_out);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < d_out; ++f) {
      double a = phase[f];
      for (std::size_t j = 0; j < input_dim; ++j)
        a += w[f * input_dim + j] * x[i * input_dim + j];
      out[i * d_out + f] = amp * std::cos(a);
    }
  return out;
}

namespace {

// logits[i*K + k] = bias_k + sum_f weights[k*D + f] * z[i*D + f]
void AffineLogits(const std::vector<double>& z, std::size_t n, std::size_t d,
                  const std::vector<double>& weights,
                  const std::vector<double>& bias, std::size_t k,
                  std::vector<double>& logits) {
  logits.resize(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      double s = bias[c];
      const double* wr = &weights[c * d];
      const double* zr = &z[i * d];
      for (std::size_t f = 0; f < d; ++f) s += wr[f] * zr[f];
      logits[i * k + c] = s;
    }
}

}  // namespace

SoftmaxClassifier Train(const FeatureSet& data, const TrainConfig& config,
                        std::vector<double>* loss_trace) {
  if (data.n == 0 || data.n_classes < 2)
    throw Error(ErrorCode::kInvalidArgument, "train: empty data");
  if (!std::isfinite(config.lr) || config.lr <= 0.0)
    throw Error(ErrorCode::kInvalidArgument, "train: lr must be positive");
  for (auto label : data.labels)
    if (label >= data.n_classes)
      throw Error(ErrorCode::kLabelOutOfRange, "train: label out of range");

  const std::size_t n = data.n, k = data.n_classes;
  const std::size_t d = MappedDim(config.feature_map, data.dim);
  const auto z = ApplyFeatureMap(config.feature_map, data.x, n, data.dim);

  SoftmaxClassifier clf;
  clf.n_classes = k;
  clf.input_dim = data.dim;
  clf.feature_map = config.feature_map;
  clf.weights.assign(k * d, 0.0);
  clf.bias.assign(k, 0.0);
  if (loss_trace) loss_trace->clear();

  std::vector<double> logits, grad_w(k * d), grad_b(k), p(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  auto evaluate = [&](bool with_grad) {
    AffineLogits(z, n, d, clf.weights, clf.bias, k, logits);
    if (with_grad) {
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> row(&logits[i * k], k);
      const double lse = LogSumExp(row);
      loss += lse - row[data.labels[i]];
      if (!with_grad) continue;
      for (std::size_t c = 0; c < k; ++c) {
        const double g =
            std::exp(row[c] - lse) - (c == data.labels[i] ? 1.0 : 0.0);
        grad_b[c] += g;
        double* gw = &grad_w[c * d];
        const double* zr = &z[i * d];
        for (std::size_t f = 0; f < d; ++f) gw[f] += g * zr[f];
      }
    }
    if (with_grad) {
      for (double& g : grad_w) g *= inv_n;
      for (double& g : grad_b) g *= inv_n;
    }
    return loss * inv_n;
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = evaluate(true);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::kNumeric,
                  "train: loss diverged at epoch " + std::to_string(epoch));
    if (loss_trace) loss_trace->push_back(loss);
    double gmax = 0.0;
    for (double g : grad_w) gmax = std::max(gmax, std::abs(g));
    for (double g : grad_b) gmax = std::max(gmax, std::abs(g));
    if (gmax < 1e-6) return clf;
    for (std::size_t i = 0; i < grad_w.size(); ++i)
      clf.weights[i] -= config.lr * grad_w[i];
    for (std::size_t c = 0; c < k; ++c) clf.bias[c] -= config.lr * grad_b[c];
  }
  const double final_loss = evaluate(false);
  if (!std::isfinite(final_loss))
    throw Error(ErrorCode::kNumeric,
                "train: loss diverged at epoch " + std::to_string(config.epochs));
  if (loss_trace) loss_trace->push_back(final_loss);
  return clf;
}

LogitStore LogitsOf(const SoftmaxClassifier& clf, const FeatureSet& data,
                    std::string dataset_id) {
  if (data.dim != clf.input_dim)
    throw Error(ErrorCode::kShapeMismatch,
                "logits_of: features have dimension " + std::to_string(data.dim) +
                    ", classifier expects " + std::to_string(clf.input_dim));
  const std::size_t d = MappedDim(clf.feature_map, clf.input_dim);
  const auto z = ApplyFeatureMap(clf.feature_map, data.x, data.n, data.dim);
  std::vector<double> logits;
  AffineLogits(z, data.n, d, clf.weights, clf.bias, clf.n_classes, logits);
  std::optional<std::vector<std::uint32_t>> labels;
  if (!data.labels.empty()) labels = data.labels;
  return LogitStore(data.n, clf.n_classes, std::move(logits), std::move(labels),
                    std::move(dataset_id));
}

namespace {

struct NamedFamily {
  ShiftFamily family;
  std::string_view name;
};

constexpr NamedFamily kFamilyNames[] = {
    {ShiftFamily::kGaussianNoise, "gaussian_noise"},
    {ShiftFamily::kFeatureDropout, "feature_dropout"},
    {ShiftFamily::kScale, "scale"},
    {ShiftFamily::kRotate, "rotate"},
    {ShiftFamily::kMeanShift, "mean_shift"},
};

std::vector<double> UnitVector(CounterRng& rng, std::size_t dim) {
  while (true) {
    std::vector<double> u(dim);
    double norm = 0.0;
    for (double& v : u) {
      v = rng.Normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (double& v : u) v /= norm;
    return u;
  }
}

}  // namespace

std::string_view ShiftFamilyName(ShiftFamily family) {
  for (const auto& f : kFamilyNames)
    if (f.family == family) return f.name;
  return "unknown";
}

ShiftFamily ParseShiftFamily(std::string_view name) {
  for (const auto& f : kFamilyNames)
    if (f.name == name) return f.family;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown shift family '" + std::string(name) + "'");
}

FeatureSet ApplyShift(const FeatureSet& data, const ShiftSpec& spec,
                      double intensity) {
  if (spec.severity < 1 || spec.severity > 5)
    throw Error(ErrorCode::kInvalidArgument,
                "shift severity must be in 1..5, got " +
                    std::to_string(spec.severity));
  if (!std::isfinite(intensity) || intensity < 0.0)
    throw Error(ErrorCode::kInvalidArgument,
                "shift intensity must be finite and >= 0");
  const double s = static_cast<double>(spec.severity) * intensity;
  const std::size_t n = data.n, d = data.dim;
  FeatureSet out = data;
  CounterRng rng(spec.seed);

  switch (spec.family) {
    case ShiftFamily::kGaussianNoise: {
      std::vector<double> mean(d, 0.0), sd(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += data.x[i * d + j];
      for (double& m : mean) m /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double dev = data.x[i * d + j] - mean[j];
          sd[j] += dev * dev;
        }
      for (double& v : sd) v = std::sqrt(v / static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
          out.x[i * d + j] += rng.Normal() * 0.1 * s * sd[j];
      break;
    }
    case ShiftFamily::kFeatureDropout: {
      const double p = 0.05 * s;
      for (double& v : out.x)
        if (rng.Uniform() < p) v = 0.0;
      break;
    }
    case ShiftFamily::kScale: {
      const double g = 1.0 + 0.15 * s;
      const double factor = spec.severity % 2 == 0 ? g : 1.0 / g;
      for (double& v : out.x) v *= factor;
      break;
    }
    case ShiftFamily::kRotate: {
      if (d < 2)
        throw Error(ErrorCode::kInvalidArgument,
                    "rotate needs feature dimension >= 2");
      // Orthonormal pair (u, v) spanning the rotation plane.
      auto u = UnitVector(rng, d);
      std::vector<double> v;
      while (true) {
        v = UnitVector(rng, d);
        const double dot = std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
        for (std::size_t j = 0; j < d; ++j) v[j] -= dot * u[j];
        double norm = 0.0;
        for (double c : v) norm += c * c;
        norm = std::sqrt(norm);
        if (norm < 1e-6) continue;
        for (double& c : v) c /= norm;
        break;
      }
      const double angle = 0.1 * s;
      const double cs = std::cos(angle), sn = std::sin(angle);
      for (std::size_t i = 0; i < n; ++i) {
        double* row = &out.x[i * d];
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          a += row[j] * u[j];
          b += row[j] * v[j];
        }
        const double a2 = cs * a - sn * b, b2 = sn * a + cs * b;
        for (std::size_t j = 0; j < d; ++j)
          row[j] += (a2 - a) * u[j] + (b2 - b) * v[j];
      }
      break;
    }
    case ShiftFamily::kMeanShift: {
      const auto u = UnitVector(rng, d);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.x[i * d + j] += 0.2 * s * u[j];
      break;
    }
  }
  return out;
}

std::vector<std::size_t> ImbalanceCounts(std::size_t n_max,
                                         std::size_t n_classes, double r) {
  if (!(r > 0.0 && r <= 1.0))
    throw Error(ErrorCode::kInvalidArgument,
                "imbalance ratio must be in (0, 1]");
  if (n_classes < 2)
    throw Error(ErrorCode::kInvalidArgument, "imbalance needs >= 2 classes");
  std::vector<std::size_t> counts(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    const double e = static_cast<double>(k) / static_cast<double>(n_classes - 1);
    counts[k] = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_max) * std::pow(r, e)));
    if (counts[k] == 0)
      throw Error(ErrorCode::kInvalidArgument,
                  "imbalance leaves class " + std::to_string(k) + " empty");
  }
  return counts;
}

FeatureSet ImbalanceSample(const FeatureSet& data, double r, std::uint64_t seed,
                           std::vector<std::size_t>* kept_indices) {
  std::vector<std::vector<std::size_t>> by_class(data.n_classes);
  for (std::size_t i = 0; i < data.n; ++i)
    by_class[data.labels[i]].push_back(i);
  std::size_t n_max = data.n;
  for (const auto& members : by_class) n_max = std::min(n_max, members.size());
  if (n_max == 0)
    throw Error(ErrorCode::kInvalidArgument,
                "imbalance: some class has no samples");
  const auto counts = ImbalanceCounts(n_max, data.n_classes, r);

  CounterRng rng(seed);
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < data.n_classes; ++k) {
    auto& members = by_class[k];
    // Partial Fisher-Yates: the first counts[k] slots become the sample.
    for (std::size_t i = 0; i < counts[k]; ++i) {
      const std::size_t j = i + rng.Below(members.size() - i);
      std::swap(members[i], members[j]);
    }
    kept.insert(kept.end(), members.begin(), members.begin() + counts[k]);
  }
  std::sort(kept.begin(), kept.end());

  FeatureSet out;
  out.n = kept.size();
  out.dim = data.dim;
  out.n_classes = data.n_classes;
  out.x.reserve(kept.size() * data.dim);
  out.labels.reserve(kept.size());
  for (std::size_t i : kept) {
    out.x.insert(out.x.end(), data.x.begin() + i * data.dim,
                 data.x.begin() + (i + 1) * data.dim);
    out.labels.push_back(data.labels[i]);
  }
  if (kept_indices) *kept_indices = std::move(kept);
  return out;
}

double ProjNorm(const SoftmaxClassifier& clf, const FeatureSet& target,
                const TrainConfig& config) {
  const LogitStore logits = LogitsOf(clf, target);
  FeatureSet pseudo = target;
  for (std::size_t i = 0; i < target.n; ++i)
    pseudo.labels[i] = static_cast<std::uint32_t>(Argmax(logits.row(i)));
  TrainConfig cfg = config;
  cfg.feature_map = clf.feature_map;
  const SoftmaxClassifier fresh = Train(pseudo, cfg);
  double sq = 0.0;
  for (std::size_t i = 0; i < clf.weights.size(); ++i) {
    const double diff = clf.weights[i] - fresh.weights[i];
    sq += diff * diff;
  }
  for (std::size_t c = 0; c < clf.bias.size(); ++c) {
    const double diff = clf.bias[c] - fresh.bias[c];
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

SoftmaxClassifier AgreePartner(const FeatureSet& data, const TrainConfig& config,
                               std::uint64_t alt_seed) {
  TrainConfig cfg = config;
  if (cfg.feature_map.kind == FeatureMap::Kind::kRandomFourier)
    cfg.feature_map.seed = alt_seed;
  return Train(data, cfg);
}

}  // namespace mde
