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

#include "mde/mde.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "mde/error.hpp"
#include "mde/logit_store.hpp"
#include "mde/measures.hpp"
#include "mde/pipeline.hpp"
#include "mde/report.hpp"
#include "mde/stats.hpp"

struct mde_store {
  mde::LogitStore store;
};

struct mde_result {
  std::string json, csv, manifest;
  std::vector<mde_store> stores;
};

struct mde_report {
  std::vector<std::string> measures, svgs;
};

namespace {

thread_local std::string g_last_error;

mde_status Fail(mde_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into a status plus g_last_error.
template <typename Body>
mde_status Guard(Body&& body) {
  try {
    body();
    return MDE_OK;
  } catch (const mde::Error& e) {
    return Fail(static_cast<mde_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(MDE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(MDE_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(MDE_ERR_INTERNAL, "unknown internal error");
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Require(const void* p, const char* what) {
  if (p == nullptr)
    throw mde::Error(mde::ErrorCode::kInvalidArgument,
                     std::string(what) + " must not be NULL");
}

mde::RegressionModel ToModel(const mde_model* m) {
  mde::RegressionModel r;
  r.slope = m->w;
  r.intercept = m->b;
  r.n_fit_points = m->n;
  r.r_squared_fit = m->r2;
  return r;
}

mde_model FromModel(const mde::RegressionModel& r) {
  return mde_model{r.slope, r.intercept, r.n_fit_points, r.r_squared_fit};
}

template <typename Fn>
mde_status PairStat(const double* x, const double* y, size_t n, double* out, Fn fn) {
  return Guard([&] {
    Require(out, "out");
    if (n > 0) {
      Require(x, "x");
      Require(y, "y");
    }
    *out = fn(std::span<const double>(x, n), std::span<const double>(y, n));
  });
}

}  // namespace

extern "C" {

const char* mde_version(void) { return "1.0.0"; }

const char* mde_last_error(void) { return g_last_error.c_str(); }

const char* mde_status_name(mde_status status) {
  if (status == MDE_OK) return "ok";
  if (status == MDE_ERR_INTERNAL) return "internal";
  return mde::ErrorCodeName(static_cast<mde::ErrorCode>(static_cast<int>(status)));
}

void mde_string_free(char* s) { std::free(s); }

mde_status mde_store_create(size_t n_samples, size_t n_classes, const double* logits,
                            const uint32_t* labels, const char* dataset_id,
                            mde_store** out) {
  return Guard([&] {
    Require(out, "out");
    *out = nullptr;
    Require(logits, "logits");
    std::optional<std::vector<std::uint32_t>> lab;
    if (labels) lab.emplace(labels, labels + n_samples);
    *out = new mde_store{mde::LogitStore(
        n_samples, n_classes, std::vector<double>(logits, logits + n_samples * n_classes),
        std::move(lab), dataset_id ? dataset_id : "")};
  });
}

mde_status mde_store_load(const char* path, mde_store** out) {
  return Guard([&] {
    Require(out, "out");
    *out = nullptr;
    Require(path, "path");
    *out = new mde_store{mde::LoadStore(path, mde::FormatFromPath(path))};
  });
}

mde_status mde_store_save(const mde_store* store, const char* path) {
  return Guard([&] {
    Require(store, "store");
    Require(path, "path");
    mde::SaveStore(store->store, path, mde::FormatFromPath(path));
  });
}

void mde_store_free(mde_store* store) { delete store; }

size_t mde_store_n_samples(const mde_store* store) {
  return store ? store->store.n_samples() : 0;
}

size_t mde_store_n_classes(const mde_store* store) {
  return store ? store->store.n_classes() : 0;
}

int mde_store_has_labels(const mde_store* store) {
  return store && store->store.has_labels() ? 1 : 0;
}

const char* mde_store_dataset_id(const mde_store* store) {
  return store ? store->store.dataset_id().c_str() : "";
}

const double* mde_store_logits(const mde_store* store) {
  return store ? store->store.logits().data() : nullptr;
}

mde_status mde_store_accuracy(const mde_store* store, double* out) {
  return Guard([&] {
    Require(store, "store");
    Require(out, "out");
    *out = mde::TrueAccuracy(store->store);
  });
}

size_t mde_measure_count(void) { return mde::AllMeasureIds().size(); }

const char* mde_measure_name(size_t index) {
  const auto& ids = mde::AllMeasureIds();
  if (index >= ids.size()) return nullptr;
  return mde::MeasureName(ids[index]).data();
}

int mde_measure_needs_aux(const char* name) {
  if (name == nullptr) return 0;
  try {
    return mde::NeedsAuxiliary(mde::ParseMeasureId(name)) ? 1 : 0;
  } catch (...) {
    return 0;
  }
}

mde_status mde_compute_measure(const char* name, const mde_store* target,
                               const mde_store* aux, double temperature, double* value,
                               int* approximate) {
  return Guard([&] {
    Require(name, "name");
    Require(target, "target");
    Require(value, "value");
    const auto id = mde::ParseMeasureId(name);
    const auto v = mde::ComputeMeasure(id, target->store, aux ? &aux->store : nullptr,
                                       mde::Temperature(temperature));
    *value = v.value;
    if (approximate) *approximate = v.approximate ? 1 : 0;
  });
}

mde_status mde_energy(const mde_store* store, double temperature, double* out_energies) {
  return Guard([&] {
    Require(store, "store");
    Require(out_energies, "out_energies");
    const auto z = mde::Energy(store->store, mde::Temperature(temperature));
    std::copy(z.begin(), z.end(), out_energies);
  });
}

mde_status mde_fit_linear(const double* x, const double* y, size_t n, mde_model* out) {
  return Guard([&] {
    Require(out, "out");
    Require(x, "x");
    Require(y, "y");
    *out = FromModel(mde::FitLinear(std::span<const double>(x, n),
                                    std::span<const double>(y, n)));
  });
}

double mde_predict_raw(const mde_model* model, double measure) {
  return model ? mde::PredictRaw(ToModel(model), measure) : 0.0;
}

double mde_predict_accuracy(const mde_model* model, double measure) {
  return model ? mde::PredictAccuracy(ToModel(model), measure) : 0.0;
}

mde_status mde_model_to_json(const mde_model* model, char** out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    *out = Dup(mde::ModelToJson(ToModel(model)));
  });
}

mde_status mde_model_from_json(const char* json, mde_model* out) {
  return Guard([&] {
    Require(json, "json");
    Require(out, "out");
    *out = FromModel(mde::ModelFromJson(json));
  });
}

mde_status mde_pearson(const double* x, const double* y, size_t n, double* out) {
  return PairStat(x, y, n, out, [](auto a, auto b) { return mde::Pearson(a, b); });
}

mde_status mde_spearman(const double* x, const double* y, size_t n, double* out) {
  return PairStat(x, y, n, out, [](auto a, auto b) { return mde::Spearman(a, b); });
}

mde_status mde_r_squared(const double* pred, const double* truth, size_t n, double* out) {
  return PairStat(pred, truth, n, out, [](auto a, auto b) { return mde::RSquared(a, b); });
}

mde_status mde_mae(const double* pred, const double* truth, size_t n, double* out) {
  return PairStat(pred, truth, n, out, [](auto a, auto b) { return mde::Mae(a, b); });
}

mde_status mde_config_canonical(char** out_json) {
  return Guard([&] {
    Require(out_json, "out_json");
    *out_json = Dup(mde::ExperimentConfigToJson(mde::CanonicalConfig()));
  });
}

mde_status mde_config_normalize(const char* config_json, char** out_json) {
  return Guard([&] {
    Require(config_json, "config_json");
    Require(out_json, "out_json");
    *out_json = Dup(mde::ExperimentConfigToJson(mde::ParseExperimentConfig(config_json)));
  });
}

mde_status mde_experiment_run(const char* config_json, mde_experiment_kind kind,
                              const uint64_t* seed, const double* temperature,
                              mde_result** out) {
  return Guard([&] {
    Require(out, "out");
    *out = nullptr;
    Require(config_json, "config_json");
    auto cfg = mde::ParseExperimentConfig(config_json);
    if (seed) cfg.seed = *seed;
    if (temperature) cfg.temperature = mde::Temperature(*temperature);

    auto result = std::make_unique<mde_result>();
    std::vector<mde::ExperimentResult> results;
    switch (kind) {
      case MDE_EXPERIMENT_AUTOEVAL:
        results.push_back(mde::RunAutoEval(cfg));
        result->json = mde::ResultToJson(results.front());
        break;
      case MDE_EXPERIMENT_STRESS_NOISE:
        results.push_back(mde::StressNoise(cfg));
        result->json = mde::ResultToJson(results.front());
        break;
      case MDE_EXPERIMENT_STRESS_IMBALANCE:
        results = mde::StressImbalance(cfg);
        result->json = mde::ResultsToJson(results);
        break;
      default:
        throw mde::Error(mde::ErrorCode::kInvalidArgument, "unknown experiment kind");
    }
    result->csv = mde::ResultsToCsv(results);
    result->manifest = mde::ManifestToJson(results);
    auto add = [&](const mde::DatasetRecord& d) {
      if (d.logits) result->stores.push_back(mde_store{*d.logits});
    };
    add(results.front().source);
    for (const auto& d : results.front().seen) add(d);
    for (const auto& r : results)
      for (const auto& d : r.evaluated) add(d);
    *out = result.release();
  });
}

void mde_result_free(mde_result* result) { delete result; }

const char* mde_result_json(const mde_result* result) {
  return result ? result->json.c_str() : "";
}

const char* mde_result_csv(const mde_result* result) {
  return result ? result->csv.c_str() : "";
}

const char* mde_result_manifest(const mde_result* result) {
  return result ? result->manifest.c_str() : "";
}

size_t mde_result_store_count(const mde_result* result) {
  return result ? result->stores.size() : 0;
}

const mde_store* mde_result_store(const mde_result* result, size_t index) {
  if (!result || index >= result->stores.size()) return nullptr;
  return &result->stores[index];
}

mde_status mde_report_render(const char* result_json, mde_report** out) {
  return Guard([&] {
    Require(out, "out");
    *out = nullptr;
    Require(result_json, "result_json");
    auto report = std::make_unique<mde_report>();
    for (const auto& plot : mde::ScatterPlotsFromResultJson(result_json)) {
      report->measures.push_back(plot.measure);
      report->svgs.push_back(mde::RenderScatterSvg(plot));
    }
    *out = report.release();
  });
}

void mde_report_free(mde_report* report) { delete report; }

size_t mde_report_count(const mde_report* report) {
  return report ? report->svgs.size() : 0;
}

const char* mde_report_measure(const mde_report* report, size_t index) {
  if (!report || index >= report->measures.size()) return nullptr;
  return report->measures[index].c_str();
}

const char* mde_report_svg(const mde_report* report, size_t index) {
  if (!report || index >= report->svgs.size()) return nullptr;
  return report->svgs[index].c_str();
}

}  // extern "C"
