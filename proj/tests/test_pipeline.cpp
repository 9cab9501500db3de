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

#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mde/error.hpp"
#include "mde/pipeline.hpp"
#include "mde/stats.hpp"

using mde::MeasureId;

namespace {

// Canonical geometry with a lighter trainer so each run takes well under a
// second.
mde::ExperimentConfig Small(std::vector<MeasureId> measures) {
  auto cfg = mde::CanonicalConfig();
  cfg.n_train = 600;
  cfg.n_test = 240;
  cfg.train.epochs = 150;
  cfg.measures = std::move(measures);
  return cfg;
}

std::string ConfigErrorOf(const std::string& text) {
  try {
    mde::Validate(mde::ParseExperimentConfig(text));
  } catch (const mde::Error& e) {
    CHECK(e.code() == mde::ErrorCode::kConfig);
    return e.what();
  }
  FAIL("expected a config error");
  return "";
}

}  // namespace

TEST_CASE("single-measure run has 15 seen reports") {
  const auto r = mde::RunAutoEval(Small({MeasureId::kMde}));
  CHECK(r.seen.size() == 15);
  CHECK(r.evaluated.size() == 10);
  CHECK(r.outcomes.size() == 1);
  const auto manifest = nlohmann::json::parse(mde::ManifestToJson(r));
  std::size_t seen = 0;
  for (const auto& m : manifest) seen += m["dataset_id"].get<std::string>().rfind("seen-", 0) == 0;
  CHECK(seen == 15);
  const auto report = nlohmann::json::parse(mde::ResultToJson(r));
  CHECK(report.dump().find("\"seen-gaussian_noise-1\"") != std::string::npos);
}

TEST_CASE("reported seen R squared equals r_squared of the fit") {
  const auto r = mde::RunAutoEval(
      Small({MeasureId::kMde, MeasureId::kConf, MeasureId::kEntropy, MeasureId::kNuclear,
             MeasureId::kAtc, MeasureId::kAgree}));
  for (std::size_t m = 0; m < r.outcomes.size(); ++m) {
    const auto& o = r.outcomes[m];
    std::vector<double> x, y, pred;
    for (const auto& d : r.seen) {
      x.push_back(d.values[m]);
      y.push_back(d.accuracy);
      pred.push_back(mde::PredictRaw(o.model, d.values[m]));
    }
    CHECK(std::abs(o.seen.r_squared - mde::RSquared(pred, y)) <= 1e-12);
    CHECK(o.seen.spearman_rho == mde::Spearman(x, y));
    CHECK(o.seen.pearson_r == mde::Pearson(x, y));
    // Predictions on evaluated sets come straight from the fitted line, and
    // MAE uses the clamped ones.
    std::vector<double> acc;
    for (std::size_t i = 0; i < r.evaluated.size(); ++i) {
      const double v = r.evaluated[i].values[m];
      CHECK(o.predicted_raw[i] == mde::PredictRaw(o.model, v));
      CHECK(o.predicted[i] == mde::PredictAccuracy(o.model, v));
      acc.push_back(r.evaluated[i].accuracy);
    }
    CHECK(o.mae == mde::Mae(o.predicted, acc));
  }
}

TEST_CASE("in-sample residual MAE matches predictions on the seen sets") {
  // Unseen families may not repeat seen ones, so the duplicate-set identity
  // is checked by predicting the seen records themselves.
  const auto r = mde::RunAutoEval(Small({MeasureId::kMde}));
  const auto& o = r.outcomes[0];
  std::vector<double> pred, acc, residual;
  for (const auto& d : r.seen) {
    pred.push_back(mde::PredictAccuracy(o.model, d.values[0]));
    acc.push_back(d.accuracy);
  }
  double total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - acc[i]);
  CHECK(mde::Mae(pred, acc) == doctest::Approx(100.0 * total / pred.size()));
}

TEST_CASE("runs are byte-identical") {
  const auto cfg = Small({MeasureId::kMde, MeasureId::kCot, MeasureId::kFrechet,
                          MeasureId::kProjNorm});
  const auto a = mde::RunAutoEval(cfg), b = mde::RunAutoEval(cfg);
  CHECK(mde::ResultToJson(a) == mde::ResultToJson(b));
  CHECK(mde::ResultToCsv(a) == mde::ResultToCsv(b));
  CHECK(mde::ManifestToJson(a) == mde::ManifestToJson(b));
  auto other = cfg;
  other.seed = 1;
  CHECK(mde::ResultToJson(mde::RunAutoEval(other)) != mde::ResultToJson(a));
}

TEST_CASE("stress noise") {
  const auto cfg = Small({MeasureId::kMde});
  const auto r = mde::StressNoise(cfg);
  CHECK(r.kind == "stress_noise");
  CHECK(r.evaluated.size() == cfg.unseen_shifts.size() * 5);
  CHECK(r.evaluated.front().dataset_id == "stress-feature_dropout-1+rotate-1");
  CHECK(mde::ResultToJson(r) == mde::ResultToJson(mde::StressNoise(cfg)));
  auto empty = cfg;
  empty.unseen_shifts.clear();
  CHECK_THROWS_AS(mde::StressNoise(empty), mde::Error);
}

TEST_CASE("stress imbalance at r = 1 reproduces the clean run") {
  auto cfg = Small({MeasureId::kMde, MeasureId::kConf});
  cfg.imbalance_ratios = {0.1, 1.0};
  const auto clean = mde::RunAutoEval(cfg);
  const auto runs = mde::StressImbalance(cfg);
  REQUIRE(runs.size() == 2);
  CHECK(runs[1].imbalance_ratio == 1.0);
  for (std::size_t m = 0; m < 2; ++m) CHECK(runs[1].outcomes[m].mae == clean.outcomes[m].mae);
  CHECK(runs[0].evaluated.front().dataset_id == "imbalance-feature_dropout-1-r0.1");
  CHECK(mde::ResultsToJson(runs) == mde::ResultsToJson(mde::StressImbalance(cfg)));
}

TEST_CASE("config json round trip") {
  const auto cfg = mde::CanonicalConfig();
  const auto text = mde::ExperimentConfigToJson(cfg);
  CHECK(mde::ExperimentConfigToJson(mde::ParseExperimentConfig(text)) == text);
}

TEST_CASE("configs/canonical.json matches the built-in canonical config") {
  std::ifstream in(std::string(MDE_SOURCE_DIR) + "/configs/canonical.json");
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(nlohmann::json::parse(buf.str()) ==
        nlohmann::json::parse(mde::ExperimentConfigToJson(mde::CanonicalConfig())));
}

TEST_CASE("config errors carry a JSON pointer") {
  auto base = nlohmann::json::parse(mde::ExperimentConfigToJson(mde::CanonicalConfig()));
  auto with = [&](const std::string& pointer, nlohmann::json v) {
    auto j = base;
    j[nlohmann::json::json_pointer(pointer)] = std::move(v);
    return j.dump();
  };
  auto without = [&](const std::string& key) {
    auto j = base;
    j.erase(key);
    return j.dump();
  };
  CHECK(ConfigErrorOf("{").find("config") != std::string::npos);
  CHECK(ConfigErrorOf(without("measures")).find("/measures") != std::string::npos);
  CHECK(ConfigErrorOf(with("/measures/0", "bogus")).find("/measures/0") != std::string::npos);
  CHECK(ConfigErrorOf(with("/mixture/covariance_scale", -1.0)).find("/mixture") !=
        std::string::npos);
  CHECK(ConfigErrorOf(with("/seen_shifts/0/severity", 9)).find("/seen_shifts/0") !=
        std::string::npos);
  CHECK(ConfigErrorOf(with("/unseen_shifts/0/family", "scale")).find("/unseen_shifts/0/family") !=
        std::string::npos);
  CHECK(ConfigErrorOf(with("/extra", 1)).find("/extra") != std::string::npos);
  CHECK(ConfigErrorOf(with("/temperature", 0.0)).find("/temperature") != std::string::npos);
  auto one_seen = base;
  one_seen["seen_shifts"] = nlohmann::json::array({base["seen_shifts"][0]});
  CHECK(ConfigErrorOf(one_seen.dump()).find("/seen_shifts") != std::string::npos);
}
