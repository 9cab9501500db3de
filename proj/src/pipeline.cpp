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

#include "mde/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mde/error.hpp"
#include "mde/rng.hpp"
#include "text_util.hpp"

namespace mde {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void ConfigError(const std::string& pointer,
                              const std::string& what) {
  throw Error(ErrorCode::kConfig,
              "config " + (pointer.empty() ? std::string("/") : pointer) +
                  ": " + what);
}

void CheckKeys(const json& obj, const std::string& pointer,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) ConfigError(pointer, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) ConfigError(pointer + "/" + key, "unknown field");
  }
}

const json& Require(const json& obj, const std::string& pointer,
                    const char* key) {
  if (!obj.contains(key)) ConfigError(pointer + "/" + key, "missing field");
  return obj.at(key);
}

double GetNumber(const json& v, const std::string& pointer) {
  if (!v.is_number()) ConfigError(pointer, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) ConfigError(pointer, "expected a finite number");
  return d;
}

std::uint64_t GetUnsigned(const json& v, const std::string& pointer) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    ConfigError(pointer, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string GetString(const json& v, const std::string& pointer) {
  if (!v.is_string()) ConfigError(pointer, "expected a string");
  return v.get<std::string>();
}

std::vector<ShiftEntry> ParseShifts(const json& arr, const std::string& pointer) {
  if (!arr.is_array()) ConfigError(pointer, "expected an array");
  std::vector<ShiftEntry> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = pointer + "/" + std::to_string(i);
    const json& e = arr[i];
    CheckKeys(e, p, {"family", "severity", "severities", "seed"});
    ShiftEntry base;
    try {
      base.family = ParseShiftFamily(GetString(Require(e, p, "family"), p + "/family"));
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kConfig) throw;
      ConfigError(p + "/family", err.what());
    }
    if (e.contains("seed")) base.salt = GetUnsigned(e["seed"], p + "/seed");
    std::vector<std::pair<int, std::string>> severities;
    if (e.contains("severity") == e.contains("severities"))
      ConfigError(p, "give exactly one of 'severity' or 'severities'");
    if (e.contains("severity")) {
      severities.emplace_back(0, p + "/severity");
      severities.back().first =
          static_cast<int>(GetUnsigned(e["severity"], p + "/severity"));
    } else {
      const json& list = e["severities"];
      if (!list.is_array() || list.empty())
        ConfigError(p + "/severities", "expected a non-empty array");
      for (std::size_t j = 0; j < list.size(); ++j) {
        const std::string sp = p + "/severities/" + std::to_string(j);
        severities.emplace_back(static_cast<int>(GetUnsigned(list[j], sp)), sp);
      }
    }
    for (const auto& [sev, sp] : severities) {
      if (sev < 1 || sev > 5) ConfigError(sp, "severity must be in 1..5");
      ShiftEntry entry = base;
      entry.severity = sev;
      out.push_back(entry);
    }
  }
  return out;
}

}  // namespace

ExperimentConfig ParseExperimentConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  CheckKeys(j, "", {"seed", "temperature", "mixture", "n_train", "n_test", "train",
                    "seen_shifts", "unseen_shifts", "measures", "imbalance_ratios"});
  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = GetUnsigned(j["seed"], "/seed");
  if (j.contains("temperature")) {
    const double t = GetNumber(j["temperature"], "/temperature");
    if (t <= 0.0) ConfigError("/temperature", "must be > 0");
    cfg.temperature = Temperature(t);
  }

  const json& mix = Require(j, "", "mixture");
  CheckKeys(mix, "/mixture", {"n_classes", "dim", "means", "covariance_scale"});
  cfg.mixture.n_classes = GetUnsigned(Require(mix, "/mixture", "n_classes"), "/mixture/n_classes");
  cfg.mixture.dim = GetUnsigned(Require(mix, "/mixture", "dim"), "/mixture/dim");
  cfg.mixture.covariance_scale =
      GetNumber(Require(mix, "/mixture", "covariance_scale"), "/mixture/covariance_scale");
  const json& means = Require(mix, "/mixture", "means");
  if (!means.is_array() || means.size() != cfg.mixture.n_classes)
    ConfigError("/mixture/means", "expected n_classes rows");
  for (std::size_t k = 0; k < means.size(); ++k) {
    const std::string p = "/mixture/means/" + std::to_string(k);
    if (!means[k].is_array() || means[k].size() != cfg.mixture.dim)
      ConfigError(p, "expected dim entries");
    for (std::size_t d = 0; d < means[k].size(); ++d)
      cfg.mixture.means.push_back(GetNumber(means[k][d], p + "/" + std::to_string(d)));
  }
  try {
    Validate(cfg.mixture);
  } catch (const Error& e) {
    ConfigError("/mixture", e.what());
  }

  if (j.contains("n_train")) cfg.n_train = GetUnsigned(j["n_train"], "/n_train");
  if (j.contains("n_test")) cfg.n_test = GetUnsigned(j["n_test"], "/n_test");
  if (cfg.n_train < cfg.mixture.n_classes)
    ConfigError("/n_train", "needs at least one sample per class");
  if (cfg.n_test < 2 * cfg.mixture.n_classes)
    ConfigError("/n_test", "needs at least two samples per class");

  if (j.contains("train")) {
    const json& tr = j["train"];
    CheckKeys(tr, "/train", {"lr", "epochs", "feature_map"});
    if (tr.contains("lr")) {
      cfg.train.lr = GetNumber(tr["lr"], "/train/lr");
      if (cfg.train.lr <= 0.0) ConfigError("/train/lr", "must be > 0");
    }
    if (tr.contains("epochs")) cfg.train.epochs = GetUnsigned(tr["epochs"], "/train/epochs");
    if (tr.contains("feature_map")) {
      const json& fm = tr["feature_map"];
      CheckKeys(fm, "/train/feature_map", {"kind", "n_features", "bandwidth"});
      const std::string kind =
          GetString(Require(fm, "/train/feature_map", "kind"), "/train/feature_map/kind");
      if (kind == "identity") {
        cfg.train.feature_map.kind = FeatureMap::Kind::kIdentity;
      } else if (kind == "random_fourier") {
        cfg.train.feature_map.kind = FeatureMap::Kind::kRandomFourier;
        cfg.train.feature_map.n_features = GetUnsigned(
            Require(fm, "/train/feature_map", "n_features"), "/train/feature_map/n_features");
        if (cfg.train.feature_map.n_features == 0)
          ConfigError("/train/feature_map/n_features", "must be >= 1");
        cfg.train.feature_map.bandwidth = GetNumber(
            Require(fm, "/train/feature_map", "bandwidth"), "/train/feature_map/bandwidth");
        if (cfg.train.feature_map.bandwidth <= 0.0)
          ConfigError("/train/feature_map/bandwidth", "must be > 0");
      } else {
        ConfigError("/train/feature_map/kind", "expected 'identity' or 'random_fourier'");
      }
    }
  }

  cfg.seen_shifts = ParseShifts(Require(j, "", "seen_shifts"), "/seen_shifts");
  cfg.unseen_shifts = ParseShifts(Require(j, "", "unseen_shifts"), "/unseen_shifts");

  const json& ms = Require(j, "", "measures");
  if (!ms.is_array()) ConfigError("/measures", "expected an array");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::string p = "/measures/" + std::to_string(i);
    try {
      cfg.measures.push_back(ParseMeasureId(GetString(ms[i], p)));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      ConfigError(p, e.what());
    }
    if (std::count(cfg.measures.begin(), cfg.measures.end(), cfg.measures.back()) > 1)
      ConfigError(p, "duplicate measure");
  }

  if (j.contains("imbalance_ratios")) {
    const json& rs = j["imbalance_ratios"];
    if (!rs.is_array() || rs.empty())
      ConfigError("/imbalance_ratios", "expected a non-empty array");
    cfg.imbalance_ratios.clear();
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const std::string p = "/imbalance_ratios/" + std::to_string(i);
      const double r = GetNumber(rs[i], p);
      if (!(r > 0.0 && r <= 1.0)) ConfigError(p, "ratio must be in (0, 1]");
      cfg.imbalance_ratios.push_back(r);
    }
  }

  try {
    Validate(cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, e.what());
  }
  return cfg;
}

void Validate(const ExperimentConfig& cfg) {
  Validate(cfg.mixture);
  if (cfg.seen_shifts.size() < 2)
    ConfigError("/seen_shifts", "at least two seen shifts are required");
  std::set<ShiftFamily> seen;
  for (const auto& s : cfg.seen_shifts) seen.insert(s.family);
  for (std::size_t i = 0; i < cfg.unseen_shifts.size(); ++i)
    if (seen.count(cfg.unseen_shifts[i].family))
      ConfigError("/unseen_shifts/" + std::to_string(i) + "/family",
                  "family '" +
                      std::string(ShiftFamilyName(cfg.unseen_shifts[i].family)) +
                      "' is also a seen family");
  if (cfg.measures.empty()) ConfigError("/measures", "at least one measure is required");
  if (cfg.n_test < 2) ConfigError("/n_test", "must be >= 2");
}

namespace {

ordered_json ShiftsToJson(const std::vector<ShiftEntry>& shifts) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : shifts) {
    ordered_json e;
    e["family"] = ShiftFamilyName(s.family);
    e["severity"] = s.severity;
    e["seed"] = s.salt;
    arr.push_back(e);
  }
  return arr;
}

ordered_json ConfigJson(const ExperimentConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["temperature"] = cfg.temperature.value();
  ordered_json mix;
  mix["n_classes"] = cfg.mixture.n_classes;
  mix["dim"] = cfg.mixture.dim;
  ordered_json means = ordered_json::array();
  for (std::size_t k = 0; k < cfg.mixture.n_classes; ++k) {
    ordered_json row = ordered_json::array();
    for (std::size_t d = 0; d < cfg.mixture.dim; ++d)
      row.push_back(cfg.mixture.means[k * cfg.mixture.dim + d]);
    means.push_back(row);
  }
  mix["means"] = means;
  mix["covariance_scale"] = cfg.mixture.covariance_scale;
  j["mixture"] = mix;
  j["n_train"] = cfg.n_train;
  j["n_test"] = cfg.n_test;
  ordered_json tr;
  tr["lr"] = cfg.train.lr;
  tr["epochs"] = cfg.train.epochs;
  ordered_json fm;
  if (cfg.train.feature_map.kind == FeatureMap::Kind::kIdentity) {
    fm["kind"] = "identity";
  } else {
    fm["kind"] = "random_fourier";
    fm["n_features"] = cfg.train.feature_map.n_features;
    fm["bandwidth"] = cfg.train.feature_map.bandwidth;
  }
  tr["feature_map"] = fm;
  j["train"] = tr;
  j["seen_shifts"] = ShiftsToJson(cfg.seen_shifts);
  j["unseen_shifts"] = ShiftsToJson(cfg.unseen_shifts);
  ordered_json ms = ordered_json::array();
  for (auto id : cfg.measures) ms.push_back(MeasureName(id));
  j["measures"] = ms;
  j["imbalance_ratios"] = cfg.imbalance_ratios;
  return j;
}

}  // namespace

std::string ExperimentConfigToJson(const ExperimentConfig& cfg) {
  return ConfigJson(cfg).dump(2) + "\n";
}

ExperimentConfig CanonicalConfig() {
  ExperimentConfig cfg;
  cfg.mixture.n_classes = 3;
  cfg.mixture.dim = 2;
  cfg.mixture.covariance_scale = 0.02;
  const double radius = 1.5, cx = 0.5, cy = 0.3;
  for (int k = 0; k < 3; ++k) {
    // Round to 1e-6 so the JSON form of the canonical config is exact.
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 3.0;
    cfg.mixture.means.push_back(std::round((cx + radius * std::cos(angle)) * 1e6) / 1e6);
    cfg.mixture.means.push_back(std::round((cy + radius * std::sin(angle)) * 1e6) / 1e6);
  }
  cfg.n_train = 2000;
  cfg.n_test = 480;
  cfg.train.lr = 1.0;
  cfg.train.epochs = 1000;
  cfg.train.feature_map.kind = FeatureMap::Kind::kRandomFourier;
  cfg.train.feature_map.n_features = 64;
  cfg.train.feature_map.bandwidth = 0.15;
  for (auto fam : {ShiftFamily::kGaussianNoise, ShiftFamily::kScale, ShiftFamily::kMeanShift})
    for (int s = 1; s <= 5; ++s) cfg.seen_shifts.push_back({fam, s, 0});
  for (auto fam : {ShiftFamily::kFeatureDropout, ShiftFamily::kRotate})
    for (int s = 1; s <= 5; ++s) cfg.unseen_shifts.push_back({fam, s, 0});
  cfg.measures = AllMeasureIds();
  cfg.seed = 0;
  return cfg;
}

const MeasureOutcome& ExperimentResult::outcome(MeasureId id) const {
  for (const auto& o : outcomes)
    if (o.measure == id) return o;
  throw Error(ErrorCode::kInvalidArgument,
              "result has no outcome for measure '" + std::string(MeasureName(id)) + "'");
}

namespace {

std::uint64_t ShiftSeed(const ExperimentConfig& cfg, ShiftFamily family,
                        std::uint64_t salt) {
  return DeriveSeed(cfg.seed, "shift/" + std::string(ShiftFamilyName(family)), salt);
}

std::string ShiftId(const char* prefix, const ShiftEntry& e) {
  return std::string(prefix) + "-" + std::string(ShiftFamilyName(e.family)) + "-" +
         std::to_string(e.severity);
}

// Trained state shared by every dataset of one experiment.
class Lab {
 public:
  explicit Lab(const ExperimentConfig& cfg) : cfg_(cfg) {
    Validate(cfg_);
    train_cfg_ = cfg_.train;
    train_cfg_.feature_map.seed = DeriveSeed(cfg_.seed, "feature_map");

    MixtureSpec spec = cfg_.mixture;
    spec.seed = DeriveSeed(cfg_.seed, "train");
    train_ = Generate(spec, cfg_.n_train);
    spec.seed = DeriveSeed(cfg_.seed, "test");
    test_ = Generate(spec, cfg_.n_test);

    clf_ = Train(train_, train_cfg_);
    train_accuracy_ = TrueAccuracy(LogitsOf(clf_, train_));
    if (Uses(MeasureId::kAgree))
      partner_ = AgreePartner(train_, train_cfg_, DeriveSeed(cfg_.seed, "partner"));
    source_ = Measure(test_, "source", "", 0, spec.seed);
  }

  bool Uses(MeasureId id) const {
    return std::find(cfg_.measures.begin(), cfg_.measures.end(), id) != cfg_.measures.end();
  }

  const FeatureSet& test() const { return test_; }
  const DatasetRecord& source() const { return source_; }
  double train_accuracy() const { return train_accuracy_; }

  DatasetRecord Measure(const FeatureSet& data, std::string id, std::string family,
                        int severity, std::uint64_t seed) const {
    DatasetRecord rec;
    rec.dataset_id = std::move(id);
    rec.family = std::move(family);
    rec.severity = severity;
    rec.seed = seed;
    try {
      rec.logits = LogitsOf(clf_, data, rec.dataset_id);
      rec.accuracy = TrueAccuracy(*rec.logits);
      for (MeasureId m : cfg_.measures) {
        MeasureValue v;
        if (m == MeasureId::kProjNorm) {
          v.value = ProjNorm(clf_, data, train_cfg_);
        } else if (m == MeasureId::kAgree) {
          const LogitStore other = LogitsOf(partner_, data);
          v = ComputeMeasure(m, *rec.logits, &other, cfg_.temperature);
        } else {
          const LogitStore* aux = nullptr;
          if (NeedsAuxiliary(m))
            aux = source_.logits ? &*source_.logits : &*rec.logits;
          v = ComputeMeasure(m, *rec.logits, aux, cfg_.temperature);
        }
        if (!std::isfinite(v.value))
          throw Error(ErrorCode::kNumeric, "measure '" + std::string(MeasureName(m)) +
                                               "' is not finite");
        rec.values.push_back(v.value);
        rec.approximate.push_back(v.approximate);
      }
    } catch (const Error& e) {
      throw Error(e.code(), rec.dataset_id + ": " + e.what());
    }
    return rec;
  }

  DatasetRecord MeasureShift(const ShiftEntry& e, const char* prefix) const {
    const std::uint64_t seed = ShiftSeed(cfg_, e.family, e.salt);
    const FeatureSet shifted = ApplyShift(test_, {e.family, e.severity, seed});
    return Measure(shifted, ShiftId(prefix, e), std::string(ShiftFamilyName(e.family)),
                   e.severity, seed);
  }

 private:
  ExperimentConfig cfg_;
  TrainConfig train_cfg_;
  FeatureSet train_, test_;
  SoftmaxClassifier clf_, partner_;
  double train_accuracy_ = 0.0;
  DatasetRecord source_;
};

ExperimentResult Assemble(const ExperimentConfig& cfg, const Lab& lab, std::string kind,
                          std::vector<DatasetRecord> seen,
                          std::vector<DatasetRecord> evaluated) {
  ExperimentResult r;
  r.kind = std::move(kind);
  r.seed = cfg.seed;
  r.temperature = cfg.temperature.value();
  r.train_accuracy = lab.train_accuracy();
  r.source = lab.source();
  r.seen = std::move(seen);
  r.evaluated = std::move(evaluated);

  std::vector<double> seen_acc, eval_acc;
  for (const auto& d : r.seen) seen_acc.push_back(d.accuracy);
  for (const auto& d : r.evaluated) eval_acc.push_back(d.accuracy);

  for (std::size_t m = 0; m < cfg.measures.size(); ++m) {
    const std::string name(MeasureName(cfg.measures[m]));
    MeasureOutcome o;
    o.measure = cfg.measures[m];
    std::vector<double> xs;
    for (const auto& d : r.seen) xs.push_back(d.values[m]);
    try {
      o.model = FitLinear(xs, seen_acc);
      std::vector<double> fitted;
      for (double x : xs) fitted.push_back(PredictRaw(o.model, x));
      o.seen.pearson_r = Pearson(xs, seen_acc);
      o.seen.spearman_rho = Spearman(xs, seen_acc);
      o.seen.r_squared = RSquared(fitted, seen_acc);
    } catch (const Error& e) {
      throw Error(e.code(), "measure '" + name + "' on the seen sets: " + e.what());
    }
    for (const auto& d : r.evaluated) {
      o.predicted_raw.push_back(PredictRaw(o.model, d.values[m]));
      o.predicted.push_back(PredictAccuracy(o.model, d.values[m]));
    }
    if (!r.evaluated.empty()) o.mae = Mae(o.predicted, eval_acc);
    r.outcomes.push_back(std::move(o));
  }
  return r;
}

std::vector<DatasetRecord> MeasureSeen(const ExperimentConfig& cfg, const Lab& lab) {
  std::vector<DatasetRecord> out;
  for (const auto& e : cfg.seen_shifts) out.push_back(lab.MeasureShift(e, "seen"));
  return out;
}

}  // namespace

ExperimentResult RunAutoEval(const ExperimentConfig& cfg) {
  const Lab lab(cfg);
  std::vector<DatasetRecord> unseen;
  for (const auto& e : cfg.unseen_shifts) unseen.push_back(lab.MeasureShift(e, "unseen"));
  return Assemble(cfg, lab, "autoeval", MeasureSeen(cfg, lab), std::move(unseen));
}

ExperimentResult StressNoise(const ExperimentConfig& cfg) {
  if (cfg.unseen_shifts.empty())
    throw Error(ErrorCode::kConfig, "config /unseen_shifts: stress_noise needs unseen shifts");
  const Lab lab(cfg);
  std::vector<ShiftFamily> families;
  for (const auto& e : cfg.unseen_shifts)
    if (std::find(families.begin(), families.end(), e.family) == families.end())
      families.push_back(e.family);

  std::vector<DatasetRecord> stressed;
  for (std::size_t i = 0; i < cfg.unseen_shifts.size(); ++i) {
    const ShiftEntry& e = cfg.unseen_shifts[i];
    const std::size_t pos =
        std::find(families.begin(), families.end(), e.family) - families.begin();
    const ShiftFamily extra = families[(pos + 1) % families.size()];
    const FeatureSet base =
        ApplyShift(lab.test(), {e.family, e.severity, ShiftSeed(cfg, e.family, e.salt)});
    const std::uint64_t seed =
        DeriveSeed(cfg.seed, "stress/" + std::string(ShiftFamilyName(extra)), i);
    for (int s = 1; s <= 5; ++s) {
      const FeatureSet x = ApplyShift(base, {extra, s, seed});
      stressed.push_back(lab.Measure(
          x, ShiftId("stress", e) + "+" + std::string(ShiftFamilyName(extra)) + "-" +
                 std::to_string(s),
          std::string(ShiftFamilyName(e.family)) + "+" + std::string(ShiftFamilyName(extra)),
          s, seed));
    }
  }
  return Assemble(cfg, lab, "stress_noise", MeasureSeen(cfg, lab), std::move(stressed));
}

std::vector<ExperimentResult> StressImbalance(const ExperimentConfig& cfg) {
  if (cfg.unseen_shifts.empty())
    throw Error(ErrorCode::kConfig,
                "config /unseen_shifts: stress_imbalance needs unseen shifts");
  const Lab lab(cfg);
  const auto seen = MeasureSeen(cfg, lab);
  std::vector<ExperimentResult> out;
  for (double r : cfg.imbalance_ratios) {
    std::vector<DatasetRecord> evaluated;
    for (std::size_t i = 0; i < cfg.unseen_shifts.size(); ++i) {
      const ShiftEntry& e = cfg.unseen_shifts[i];
      const FeatureSet shifted =
          ApplyShift(lab.test(), {e.family, e.severity, ShiftSeed(cfg, e.family, e.salt)});
      const std::uint64_t seed = DeriveSeed(cfg.seed, "imbalance", i);
      const FeatureSet sub = ImbalanceSample(shifted, r, seed);
      evaluated.push_back(lab.Measure(sub, ShiftId("imbalance", e) + "-r" +
                                               internal::FormatDouble(r),
                                      std::string(ShiftFamilyName(e.family)), e.severity,
                                      seed));
    }
    auto result = Assemble(cfg, lab, "stress_imbalance", seen, std::move(evaluated));
    result.imbalance_ratio = r;
    out.push_back(std::move(result));
  }
  return out;
}

namespace {

ordered_json RecordJson(const DatasetRecord& d, const std::vector<MeasureId>& measures) {
  ordered_json j;
  j["dataset_id"] = d.dataset_id;
  j["family"] = d.family;
  j["severity"] = d.severity;
  j["seed"] = d.seed;
  j["n_samples"] = d.logits ? d.logits->n_samples() : 0;
  j["accuracy"] = d.accuracy;
  ordered_json values;
  for (std::size_t m = 0; m < measures.size() && m < d.values.size(); ++m)
    values[std::string(MeasureName(measures[m]))] = d.values[m];
  j["values"] = values;
  bool any_approx = false;
  for (bool a : d.approximate) any_approx = any_approx || a;
  if (any_approx) {
    ordered_json approx = ordered_json::array();
    for (std::size_t m = 0; m < measures.size(); ++m)
      if (d.approximate[m]) approx.push_back(MeasureName(measures[m]));
    j["approximate"] = approx;
  }
  return j;
}

ordered_json ResultJson(const ExperimentResult& r) {
  std::vector<MeasureId> ids;
  for (const auto& o : r.outcomes) ids.push_back(o.measure);
  ordered_json j;
  j["kind"] = r.kind;
  j["seed"] = r.seed;
  j["temperature"] = r.temperature;
  if (r.kind == "stress_imbalance") j["imbalance_ratio"] = r.imbalance_ratio;
  j["train_accuracy"] = r.train_accuracy;
  j["source"] = RecordJson(r.source, ids);
  ordered_json seen = ordered_json::array(), evaluated = ordered_json::array();
  for (const auto& d : r.seen) seen.push_back(RecordJson(d, ids));
  for (const auto& d : r.evaluated) evaluated.push_back(RecordJson(d, ids));
  j["seen"] = seen;
  j["evaluated"] = evaluated;
  ordered_json measures;
  for (const auto& o : r.outcomes) {
    ordered_json m;
    ordered_json model;
    model["w"] = o.model.slope;
    model["b"] = o.model.intercept;
    model["n"] = o.model.n_fit_points;
    model["r2"] = o.model.r_squared_fit;
    m["model"] = model;
    m["pearson"] = o.seen.pearson_r;
    m["spearman"] = o.seen.spearman_rho;
    m["r2"] = o.seen.r_squared;
    ordered_json preds = ordered_json::array();
    for (std::size_t i = 0; i < r.evaluated.size(); ++i) {
      ordered_json p;
      p["dataset_id"] = r.evaluated[i].dataset_id;
      p["accuracy"] = r.evaluated[i].accuracy;
      p["predicted_raw"] = o.predicted_raw[i];
      p["predicted"] = o.predicted[i];
      preds.push_back(p);
    }
    m["predictions"] = preds;
    m["mae"] = o.mae;
    measures[std::string(MeasureName(o.measure))] = m;
  }
  j["measures"] = measures;
  return j;
}

}  // namespace

std::string ResultToJson(const ExperimentResult& result) {
  return ResultJson(result).dump(2) + "\n";
}

std::string ResultsToJson(const std::vector<ExperimentResult>& results) {
  ordered_json j;
  j["kind"] = results.empty() ? std::string("empty") : results.front().kind;
  ordered_json summary = ordered_json::array();
  ordered_json all = ordered_json::array();
  for (const auto& r : results) {
    ordered_json s;
    s["imbalance_ratio"] = r.imbalance_ratio;
    ordered_json maes;
    for (const auto& o : r.outcomes) maes[std::string(MeasureName(o.measure))] = o.mae;
    s["mae"] = maes;
    summary.push_back(s);
    all.push_back(ResultJson(r));
  }
  j["summary"] = summary;
  j["results"] = all;
  return j.dump(2) + "\n";
}

namespace {

void CsvRows(std::ostringstream& out, const ExperimentResult& result,
             const DatasetRecord& d) {
  for (std::size_t m = 0; m < result.outcomes.size(); ++m) {
    const auto& o = result.outcomes[m];
    out << d.dataset_id << ',' << MeasureName(o.measure) << ','
        << internal::FormatDouble(d.values[m]) << ','
        << internal::FormatDouble(d.accuracy) << ','
        << internal::FormatDouble(PredictAccuracy(o.model, d.values[m])) << '\n';
  }
}

ordered_json ManifestEntry(const DatasetRecord& d) {
  ordered_json e;
  e["dataset_id"] = d.dataset_id;
  e["family"] = d.family;
  e["severity"] = d.severity;
  e["seed"] = d.seed;
  e["accuracy"] = d.accuracy;
  return e;
}

}  // namespace

std::string ResultToCsv(const ExperimentResult& result) {
  return ResultsToCsv({result});
}

std::string ResultsToCsv(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << "dataset_id,measure,value,accuracy,predicted\n";
  if (results.empty()) return out.str();
  for (const auto& d : results.front().seen) CsvRows(out, results.front(), d);
  for (const auto& r : results)
    for (const auto& d : r.evaluated) CsvRows(out, r, d);
  return out.str();
}

std::string ManifestToJson(const ExperimentResult& result) {
  return ManifestToJson(std::vector<ExperimentResult>{result});
}

std::string ManifestToJson(const std::vector<ExperimentResult>& results) {
  ordered_json arr = ordered_json::array();
  if (!results.empty()) {
    arr.push_back(ManifestEntry(results.front().source));
    for (const auto& d : results.front().seen) arr.push_back(ManifestEntry(d));
  }
  for (const auto& r : results)
    for (const auto& d : r.evaluated) arr.push_back(ManifestEntry(d));
  return arr.dump(2) + "\n";
}

}  // namespace mde
