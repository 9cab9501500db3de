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

// Measure-vs-accuracy scatter plots as standalone SVG documents.

#ifndef MDE_REPORT_HPP_
#define MDE_REPORT_HPP_

#include <string>
#include <vector>

namespace mde {

struct ScatterPlot {
  std::string measure;
  std::vector<double> x;         // measure values
  std::vector<double> accuracy;  // fractions; drawn as percentages
  double slope = 0.0;            // fitted accuracy = slope * x + intercept
  double intercept = 0.0;
  double r_squared = 0.0;
  double pearson = 0.0;
  double spearman = 0.0;
};

// 800 x 600 viewBox, one circle per point, the fitted line, and R²/r/ρ
// annotations with three decimals. Output depends only on the input values.
std::string RenderScatterSvg(const ScatterPlot& plot);

// One plot per measure from a serialized experiment result, using its seen
// (fit) sets. A multi-ratio stress result contributes its first entry.
// Throws kInvalidArgument when the result holds no points or no measures.
std::vector<ScatterPlot> ScatterPlotsFromResultJson(const std::string& json);

}  // namespace mde

#endif  // MDE_REPORT_HPP_
