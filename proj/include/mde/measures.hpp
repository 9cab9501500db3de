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

// Dataset-level accuracy proxies computed from logits.
//
// Everything here is a pure function of immutable LogitStores and is safe to
// call concurrently. All log-sum-exp evaluations subtract the running maximum
// first, so logits of magnitude up to ~700*T neither overflow nor underflow.
// Sums run over sorted terms, so reordering samples or classes gives
// bit-identical results.

#ifndef MDE_MEASURES_HPP_
#define MDE_MEASURES_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mde/linalg.hpp"
#include "mde/logit_store.hpp"

namespace mde {

class Temperature {
 public:
  // Throws kInvalidArgument unless value is finite and > 0.
  explicit Temperature(double value = 1.0);
  double value() const { return value_; }

 private:
  double value_;
};

// Per-sample free energy Z(x) = -T * log(sum_j exp(f_j(x) / T)).
using EnergyVector = std::vector<double>;

double LogSumExp(std::span<const double> values);
double LogSumExpScaled(std::span<const double> values, double inv_scale);

EnergyVector Energy(const LogitStore& store, Temperature t = Temperature());

// Meta-distribution energy: the mean negative log of the softmax taken across
// the N sample energies. Always >= log N (Jensen), with equality iff every
// sample has the same energy. The whole store is one unit; splitting it into
// chunks changes the statistic.
double Mde(const LogitStore& store, Temperature t = Temperature());
double MdeFromEnergies(std::span<const double> energies);

double AvgEnergy(const LogitStore& store, Temperature t = Temperature());

// Mean max-softmax probability.
double ConfScore(const LogitStore& store);

// Mean of sum_j p_j log p_j, i.e. the negated Shannon entropy of the softmax
// (higher means more confident). 0 log 0 counts as 0.
double EntropyScore(const LogitStore& store);

// Per-sample sum_j p_j log p_j. The ATC score.
std::vector<double> NegativeEntropies(const LogitStore& store);

std::vector<double> Softmax(std::span<const double> logits);

enum class AtcScoreKind { kNegativeEntropy };

struct AtcThreshold {
  double t = 0.0;
  AtcScoreKind score_kind = AtcScoreKind::kNegativeEntropy;
};

// Picks t so that the share of source samples scoring below t matches the
// source error rate: the score at sorted index ceil(err * N) - 1. Zero error
// puts t just below the minimum score, full error just above the maximum.
AtcThreshold AtcCalibrate(const LogitStore& source);

// Fraction of target samples whose score is >= t.
double AtcScore(const LogitStore& target, const AtcThreshold& threshold);

// Nuclear norm of the N x K softmax matrix P divided by sqrt(min(N, K) * N).
// Singular values come from the eigenvalues of P^T P.
double NuclearNormScore(const LogitStore& store);

struct FrechetStats {
  std::vector<double> mean;
  SquareMatrix covariance;  // unbiased, divisor N - 1
};

// Gaussian statistics of the logit vectors. Requires N >= 2.
FrechetStats ComputeFrechetStats(const LogitStore& store);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the trace of the
// cross term taken as Tr(sqrt(R S_b R)) for R = sqrt(S_a). Values in
// [-1e-8, 0) snap to 0.
double FrechetDistance(const FrechetStats& a, const FrechetStats& b);

struct CotResult {
  double value = 0.0;
  bool approximate = false;
};

// Above this many samples CotScore falls back to greedy matching.
inline constexpr std::size_t kCotExactLimit = 512;

// W-infinity transport cost (L-infinity ground metric) between the target
// softmax vectors and N one-hot vectors whose class counts follow
// `source_label_marginal` under largest-remainder rounding.
CotResult CotScore(const LogitStore& target,
                   std::span<const double> source_label_marginal);

// Class counts for n samples drawn to match `marginal`: floors first, then the
// remaining units go to the largest fractional parts (lowest index on ties).
std::vector<std::size_t> LargestRemainderCounts(std::span<const double> marginal,
                                                std::size_t n);

// Label frequencies of a labeled store.
std::vector<double> LabelMarginal(const LogitStore& store);

// Fraction of samples on which both stores predict the same class.
double AgreeScore(const LogitStore& a, const LogitStore& b);

// Per-sample f_y / T - log sum_j exp(f_j / T): the true-class log-probability
// at temperature T. Never positive; times T it tends to f_y - max_j f_j as
// T -> 0.
std::vector<double> TheoremGap(const LogitStore& store,
                               Temperature t = Temperature());

enum class MeasureId {
  kMde,
  kAvgEnergy,
  kConf,
  kEntropy,
  kAtc,
  kNuclear,
  kFrechet,
  kCot,
  kAgree,
  kProjNorm,
};

std::string_view MeasureName(MeasureId id);
// Throws kInvalidArgument on an unknown name.
MeasureId ParseMeasureId(std::string_view name);
const std::vector<MeasureId>& AllMeasureIds();

// Measures that need an auxiliary store: a labeled source for atc and cot, a
// source for frechet, and the partner model's logits for agree.
bool NeedsAuxiliary(MeasureId id);

struct MeasureValue {
  double value = 0.0;
  bool approximate = false;
};

// Dispatches to the functions above. `aux` is the auxiliary store for the
// measures that need one; kMissingInput if it is absent. kProjNorm needs a
// trainer and is not computable from logits alone (kMissingInput).
MeasureValue ComputeMeasure(MeasureId id, const LogitStore& target,
                            const LogitStore* aux, Temperature t);

}  // namespace mde

#endif  // MDE_MEASURES_HPP_
