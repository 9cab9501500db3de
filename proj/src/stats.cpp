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

#include "mde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "mde/error.hpp"

namespace mde {

namespace {

void CheckPaired(std::span<const double> a, std::span<const double> b,
                 std::size_t min_len, const char* what) {
  if (a.size() != b.size())
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + ": length mismatch (" +
                    std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  if (a.size() < min_len)
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": needs at least " +
                    std::to_string(min_len) + " points");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
      throw Error(ErrorCode::kNonFinite,
                  std::string(what) + ": non-finite value at index " +
                      std::to_string(i));
}

double Mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

}  // namespace

RegressionModel FitLinear(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y, 2, "fit");
  const double mx = Mean(x), my = Mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0)
    throw Error(ErrorCode::kDegenerate,
                "fit: all measure values are identical");
  RegressionModel m;
  m.slope = sxy / sxx;
  m.intercept = my - m.slope * mx;
  m.n_fit_points = x.size();
  if (syy == 0.0) {
    m.r_squared_fit = 0.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (m.slope * x[i] + m.intercept);
      ss_res += r * r;
    }
    m.r_squared_fit = 1.0 - ss_res / syy;
  }
  if (!std::isfinite(m.slope) || !std::isfinite(m.intercept))
    throw Error(ErrorCode::kNumeric, "fit: non-finite coefficients");
  return m;
}

double PredictRaw(const RegressionModel& model, double measure) {
  return model.slope * measure + model.intercept;
}

double PredictAccuracy(const RegressionModel& model, double measure) {
  return std::clamp(PredictRaw(model, measure), 0.0, 1.0);
}

double Mae(std::span<const double> pred, std::span<const double> truth) {
  CheckPaired(pred, truth, 1, "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    total += std::abs(pred[i] - truth[i]);
  return 100.0 * total / static_cast<double>(pred.size());
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y, 2, "pearson");
  const double mx = Mean(x), my = Mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorCode::kDegenerate, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j hold ranks i+1..j+1
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y, 2, "spearman");
  const auto rx = AverageRanks(x), ry = AverageRanks(y);
  try {
    return Pearson(rx, ry);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerate)
      throw Error(ErrorCode::kDegenerate, "spearman: zero rank variance");
    throw;
  }
}

double RSquared(std::span<const double> pred, std::span<const double> truth) {
  CheckPaired(pred, truth, 2, "r_squared");
  const double mt = Mean(truth);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mt) * (truth[i] - mt);
  }
  if (ss_tot == 0.0)
    throw Error(ErrorCode::kDegenerate, "r_squared: zero truth variance");
  return 1.0 - ss_res / ss_tot;
}

std::string ModelToJson(const RegressionModel& model) {
  nlohmann::ordered_json j;
  j["w"] = model.slope;
  j["b"] = model.intercept;
  j["n"] = model.n_fit_points;
  j["r2"] = model.r_squared_fit;
  return j.dump(2) + "\n";
}

RegressionModel ModelFromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("model JSON: ") + e.what());
  }
  if (!j.is_object())
    throw Error(ErrorCode::kConfig, "model JSON: expected an object at /");
  auto number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number())
      throw Error(ErrorCode::kConfig,
                  std::string("model JSON: /") + key + " must be a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v))
      throw Error(ErrorCode::kConfig,
                  std::string("model JSON: /") + key + " is not finite");
    return v;
  };
  RegressionModel m;
  m.slope = number("w");
  m.intercept = number("b");
  if (!j.contains("n") || !j["n"].is_number_unsigned() ||
      j["n"].get<std::size_t>() < 2)
    throw Error(ErrorCode::kConfig,
                "model JSON: /n must be an integer >= 2");
  m.n_fit_points = j["n"].get<std::size_t>();
  m.r_squared_fit = number("r2");
  return m;
}

}  // namespace mde
