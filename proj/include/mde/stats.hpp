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

// Regression of accuracy on a measure, and the correlation metrics used to
// judge a measure. Accuracies are fractions in [0, 1]; only Mae() converts to
// percentage points.

#ifndef MDE_STATS_HPP_
#define MDE_STATS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mde {

struct RegressionModel {
  double slope = 0.0;      // w
  double intercept = 0.0;  // b
  std::size_t n_fit_points = 0;
  double r_squared_fit = 0.0;
};

struct CorrelationReport {
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares of y on x. Needs >= 2 points and at least two
// distinct x (kDegenerate otherwise). A constant y gives r_squared_fit = 0.
RegressionModel FitLinear(std::span<const double> x, std::span<const double> y);

double PredictRaw(const RegressionModel& model, double measure);
// PredictRaw clamped to [0, 1].
double PredictAccuracy(const RegressionModel& model, double measure);

// Mean absolute error in percentage points.
double Mae(std::span<const double> pred, std::span<const double> truth);

double Pearson(std::span<const double> x, std::span<const double> y);

// Ranks starting at 1; tied values share the mean of their rank range.
std::vector<double> AverageRanks(std::span<const double> values);
double Spearman(std::span<const double> x, std::span<const double> y);

// 1 - SS_res / SS_tot. kDegenerate when truth is constant.
double RSquared(std::span<const double> pred, std::span<const double> truth);

// {"w": ..., "b": ..., "n": ..., "r2": ...}
std::string ModelToJson(const RegressionModel& model);
// Throws kConfig naming the missing or mistyped key.
RegressionModel ModelFromJson(const std::string& json);

}  // namespace mde

#endif  // MDE_STATS_HPP_
