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

// A small synthetic world for exercising the measures end to end: Gaussian
// mixture data, a softmax classifier over optional random Fourier features,
// and parametric shifts of increasing severity.
//
// Every function is a pure function of its arguments and seeds. Randomness
// comes only from CounterRng, so outputs are byte-identical across platforms
// that share IEEE-754 double semantics and libm results for exp/log/cos/sin.

#ifndef MDE_SYNTH_LAB_HPP_
#define MDE_SYNTH_LAB_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mde/logit_store.hpp"

namespace mde {

struct MixtureSpec {
  std::size_t n_classes = 3;
  std::size_t dim = 2;
  std::vector<double> means;  // n_classes x dim, row-major
  double covariance_scale = 1.0;
  std::uint64_t seed = 0;
};

// Throws kInvalidArgument on a malformed spec (shape, duplicate means,
// non-positive covariance).
void Validate(const MixtureSpec& spec);

struct FeatureSet {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t n_classes = 0;
  std::vector<double> x;  // n x dim, row-major
  std::vector<std::uint32_t> labels;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

// Sample i has label i % K and is drawn from N(mean_label, covariance_scale*I).
FeatureSet Generate(const MixtureSpec& spec, std::size_t n);

struct FeatureMap {
  enum class Kind { kIdentity, kRandomFourier };
  Kind kind = Kind::kIdentity;
  std::size_t n_features = 0;  // random Fourier only
  double bandwidth = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

// Output width of `map` applied to inputs of dimension `input_dim`.
std::size_t MappedDim(const FeatureMap& map, std::size_t input_dim);

// Identity, or sqrt(2/D) * cos(W x + b) with W ~ N(0, 1) / bandwidth and
// b ~ U[0, 2 pi), both drawn from `map.seed`.
std::vector<double> ApplyFeatureMap(const FeatureMap& map,
                                    const std::vector<double>& x,
                                    std::size_t n, std::size_t input_dim);

struct TrainConfig {
  double lr = 0.1;
  std::size_t epochs = 100;
  FeatureMap feature_map;
};

struct SoftmaxClassifier {
  std::size_t n_classes = 0;
  std::size_t input_dim = 0;
  FeatureMap feature_map;
  std::vector<double> weights;  // n_classes x MappedDim, row-major
  std::vector<double> bias;     // n_classes

  friend bool operator==(const SoftmaxClassifier&,
                         const SoftmaxClassifier&) = default;
};

// Multinomial logistic regression by full-batch gradient descent on the mean
// negative log-likelihood, starting from zero. Stops after `epochs` updates or
// once the gradient's max-abs entry drops below 1e-6. When `loss_trace` is
// given it receives the loss before every update and once more at the end.
// A non-finite loss throws kNumeric naming the epoch.
SoftmaxClassifier Train(const FeatureSet& data, const TrainConfig& config,
                        std::vector<double>* loss_trace = nullptr);

// Logits of every sample; labels are carried over.
LogitStore LogitsOf(const SoftmaxClassifier& clf, const FeatureSet& data,
                    std::string dataset_id = "");

enum class ShiftFamily {
  kGaussianNoise,
  kFeatureDropout,
  kScale,
  kRotate,
  kMeanShift,
};

std::string_view ShiftFamilyName(ShiftFamily family);
// Throws kInvalidArgument on an unknown name.
ShiftFamily ParseShiftFamily(std::string_view name);

struct ShiftSpec {
  ShiftFamily family = ShiftFamily::kGaussianNoise;
  int severity = 1;  // 1..5
  std::uint64_t seed = 0;
};

// Severity s acts as follows (c = intensity, 1 outside tests):
//   gaussian_noise   x_j += N(0, 1) * 0.1 * s * c * std_j, std_j the
//                    population std of coordinate j over the set
//   feature_dropout  each coordinate zeroed with probability 0.05 * s * c
//   scale            x *= g for even s and x /= g for odd s, g = 1 + 0.15 * s * c
//   rotate           rotation by 0.1 * s * c radians in a seeded 2-plane
//   mean_shift       x += 0.2 * s * c * u, u a seeded unit vector
// c = 0 leaves the features unchanged.
FeatureSet ApplyShift(const FeatureSet& data, const ShiftSpec& spec,
                      double intensity = 1.0);

// Class k (in label order) keeps round(n_max * r^(k / (K - 1))) samples drawn
// without replacement, n_max being the smallest class count in `data`. Kept
// samples stay in their original order. Throws kInvalidArgument if r is
// outside (0, 1] or a class would end up empty.
FeatureSet ImbalanceSample(const FeatureSet& data, double r, std::uint64_t seed,
                           std::vector<std::size_t>* kept_indices = nullptr);

std::vector<std::size_t> ImbalanceCounts(std::size_t n_max,
                                         std::size_t n_classes, double r);

// Pseudo-labels `target` with clf, retrains from zero on those labels with
// `config`, and returns the L2 norm of the parameter difference.
double ProjNorm(const SoftmaxClassifier& clf, const FeatureSet& target,
                const TrainConfig& config);

// A second classifier on the same data. The random Fourier map is redrawn
// from `alt_seed`; with the identity map the objective is convex and the
// partner equals the original.
SoftmaxClassifier AgreePartner(const FeatureSet& data, const TrainConfig& config,
                               std::uint64_t alt_seed);

}  // namespace mde

#endif  // MDE_SYNTH_LAB_HPP_
