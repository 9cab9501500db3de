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

// End-to-end accuracy estimation on the synthetic lab.
//
// A classifier is trained on clean mixture data. Every "seen" shift yields a
// test set whose (measure, accuracy) pair joins the regression meta-set; one
// linear model per measure is fit on those pairs and then predicts the
// accuracy of every "unseen" shifted set, which never enters the fit.
//
// All randomness derives from ExperimentConfig::seed:
//   train set       DeriveSeed(seed, "train")
//   base test set   DeriveSeed(seed, "test")   (shared by every shift)
//   feature map     DeriveSeed(seed, "feature_map")
//   agree partner   DeriveSeed(seed, "partner")
//   shift           DeriveSeed(seed, "shift/<family>", salt)
// so one family reuses the same noise draw across severities.

#ifndef MDE_PIPELINE_HPP_
#define MDE_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mde/logit_store.hpp"
#include "mde/measures.hpp"
#include "mde/stats.hpp"
#include "mde/synth_lab.hpp"

namespace mde {

struct ShiftEntry {
  ShiftFamily family = ShiftFamily::kGaussianNoise;
  int severity = 1;
  std::uint64_t salt = 0;
};

struct ExperimentConfig {
  MixtureSpec mixture;  // mixture.seed is ignored; see the header comment
  std::size_t n_train = 2000;
  std::size_t n_test = 480;
  TrainConfig train;  // train.feature_map.seed is ignored likewise
  std::vector<ShiftEntry> seen_shifts;
  std::vector<ShiftEntry> unseen_shifts;
  std::vector<MeasureId> measures;
  Temperature temperature;
  std::uint64_t seed = 0;
  std::vector<double> imbalance_ratios = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
};

// Throws kConfig with the JSON pointer of the offending field.
ExperimentConfig ParseExperimentConfig(const std::string& json);
// Also checks the cross-field rules: >= 2 seen shifts, seen and unseen
// families disjoint, at least one measure.
void Validate(const ExperimentConfig& cfg);
std::string ExperimentConfigToJson(const ExperimentConfig& cfg);

// Three triangle-placed classes in the plane with random Fourier features;
// seen families gaussian_noise/scale/mean_shift and unseen families
// feature_dropout/rotate, each at severities 1..5.
ExperimentConfig CanonicalConfig();

struct DatasetRecord {
  std::string dataset_id;
  std::string family;  // "" for the clean source set
  int severity = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::vector<double> values;  // one per configured measure, in order
  std::vector<bool> approximate;
  std::optional<LogitStore> logits;
};

struct MeasureOutcome {
  MeasureId measure = MeasureId::kMde;
  RegressionModel model;
  CorrelationReport seen;  // on the fit points
  std::vector<double> predicted_raw;  // one per evaluated set
  std::vector<double> predicted;      // clamped to [0, 1]
  double mae = 0.0;                   // percentage points, clamped predictions
};

struct ExperimentResult {
  std::string kind;  // "autoeval", "stress_noise", "stress_imbalance"
  std::uint64_t seed = 0;
  double temperature = 1.0;
  double imbalance_ratio = 1.0;  // stress_imbalance only
  double train_accuracy = 0.0;
  DatasetRecord source;
  std::vector<DatasetRecord> seen;
  std::vector<DatasetRecord> evaluated;
  std::vector<MeasureOutcome> outcomes;  // one per configured measure

  const MeasureOutcome& outcome(MeasureId id) const;
};

ExperimentResult RunAutoEval(const ExperimentConfig& cfg);

// Each unseen set is corrupted again by a family it was not built from (the
// next unseen family in config order, or its own family with a fresh draw when
// only one unseen family exists) at severities 1..5, and the seen-fit
// regressors predict those sets.
ExperimentResult StressNoise(const ExperimentConfig& cfg);

// Each unseen set is subsampled by ImbalanceSample at every configured ratio.
std::vector<ExperimentResult> StressImbalance(const ExperimentConfig& cfg);

// Deterministic serializations. The CSV has one row per (dataset, measure):
// dataset_id,measure,value,accuracy,predicted with the clamped prediction
// from the seen fit.
std::string ResultToJson(const ExperimentResult& result);
std::string ResultsToJson(const std::vector<ExperimentResult>& results);
std::string ResultToCsv(const ExperimentResult& result);
// [{dataset_id, family, severity, seed, accuracy}, ...] covering the source,
// seen and evaluated sets.
std::string ManifestToJson(const ExperimentResult& result);

// Multi-result forms for StressImbalance: the shared source and seen sets are
// listed once, followed by every result's evaluated sets.
std::string ResultsToCsv(const std::vector<ExperimentResult>& results);
std::string ManifestToJson(const std::vector<ExperimentResult>& results);

}  // namespace mde

#endif  // MDE_PIPELINE_HPP_
