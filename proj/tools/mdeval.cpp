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

// mdeval: command-line front end to libmde.
//
// Exit status: 0 success, 2 invalid input or arguments, 3 a required
// auxiliary input is missing, 4 numeric or internal failure.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mde/mde.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitMissing = 3;
constexpr int kExitInternal = 4;

// Thrown to unwind with a specific exit status after printing `message`.
struct Exit {
  int code;
  std::string message;
};

int ExitCodeFor(mde_status s) {
  switch (s) {
    case MDE_OK: return kExitOk;
    case MDE_ERR_MISSING_INPUT: return kExitMissing;
    case MDE_ERR_NUMERIC:
    case MDE_ERR_INTERNAL: return kExitInternal;
    default: return kExitInput;
  }
}

void Check(mde_status s) {
  if (s != MDE_OK) throw Exit{ExitCodeFor(s), mde_last_error()};
}

std::string Num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string JsonString(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kExitInput, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Exit{kExitInput, "cannot write '" + path.string() + "'"};
  out << content;
  if (!out) throw Exit{kExitInput, "write failed for '" + path.string() + "'"};
}

std::optional<double> ParseNum(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
  std::size_t start = s.find_first_not_of(' ');
  if (start == std::string::npos) return std::nullopt;
  s = s.substr(start);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> Split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// One row of a measure table: either "value,accuracy" or the wide form
// "dataset_id,measure,value,accuracy[,...]" written by `measure` and `synth`.
struct PairRow {
  std::string dataset_id;
  std::string measure;
  double value = 0.0;
  std::optional<double> accuracy;
};

std::vector<PairRow> ReadPairs(const std::vector<std::string>& paths,
                               const std::string& measure_filter) {
  std::vector<PairRow> rows;
  for (const auto& path : paths) {
    const auto lines = Lines(ReadFile(path));
    const std::string stem = fs::path(path).stem().string();
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto f = Split(lines[i]);
      const std::string where = path + ":" + std::to_string(i + 1);
      PairRow row;
      if (f.size() <= 2) {
        auto v = ParseNum(f[0]);
        if (!v) {
          if (i == 0) continue;  // header
          throw Exit{kExitInput, where + ": unparseable value '" + f[0] + "'"};
        }
        row.dataset_id = stem + ":" + std::to_string(i + 1);
        row.measure = measure_filter.empty() ? "value" : measure_filter;
        row.value = *v;
        if (f.size() == 2) {
          row.accuracy = ParseNum(f[1]);
          if (!row.accuracy)
            throw Exit{kExitInput, where + ": unparseable accuracy '" + f[1] + "'"};
        }
      } else if (f.size() >= 4) {
        auto v = ParseNum(f[2]);
        if (!v) {
          if (i == 0) continue;
          throw Exit{kExitInput, where + ": unparseable value '" + f[2] + "'"};
        }
        row.dataset_id = f[0];
        row.measure = f[1];
        row.value = *v;
        if (!f[3].empty()) {
          row.accuracy = ParseNum(f[3]);
          if (!row.accuracy)
            throw Exit{kExitInput, where + ": unparseable accuracy '" + f[3] + "'"};
        }
        if (!measure_filter.empty() && row.measure != measure_filter) continue;
      } else {
        throw Exit{kExitInput, where + ": expected 1, 2 or at least 4 fields"};
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void SplitPairs(const std::vector<PairRow>& rows, std::vector<double>& x,
                std::vector<double>& y) {
  for (const auto& r : rows) {
    if (!r.accuracy)
      throw Exit{kExitInput, "row '" + r.dataset_id + "' has no accuracy"};
    x.push_back(r.value);
    y.push_back(*r.accuracy);
  }
  if (x.empty()) throw Exit{kExitInput, "no (measure, accuracy) rows found"};
}

struct StoreHandle {
  mde_store* p = nullptr;
  StoreHandle() = default;
  StoreHandle(const StoreHandle&) = delete;
  StoreHandle& operator=(const StoreHandle&) = delete;
  ~StoreHandle() { mde_store_free(p); }
};

struct Options {
  std::vector<std::string> in;
  std::string source;
  std::string measure;
  double temp = 1.0;
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string model;
  std::string mode = "both";
  bool temp_given = false;
};

int CmdMeasure(const Options& o) {
  if (mde_measure_needs_aux(o.measure.c_str()) && o.source.empty())
    throw Exit{kExitMissing, "measure '" + o.measure + "' needs --source"};
  StoreHandle source;
  if (!o.source.empty()) Check(mde_store_load(o.source.c_str(), &source.p));

  std::string csv = "dataset_id,measure,value,accuracy\n";
  std::string lines, json = "[";
  for (std::size_t i = 0; i < o.in.size(); ++i) {
    StoreHandle store;
    Check(mde_store_load(o.in[i].c_str(), &store.p));
    double value = 0.0;
    int approx = 0;
    Check(mde_compute_measure(o.measure.c_str(), store.p, source.p, o.temp, &value, &approx));
    const std::string id = mde_store_dataset_id(store.p);
    std::optional<double> acc;
    if (mde_store_has_labels(store.p)) {
      double a = 0.0;
      Check(mde_store_accuracy(store.p, &a));
      acc = a;
    }
    lines += id + "," + o.measure + "," + Num(value) + (acc ? "," + Num(*acc) : "") + "\n";
    csv += id + "," + o.measure + "," + Num(value) + "," + (acc ? Num(*acc) : "") + "\n";
    json += std::string(i ? "," : "") + "\n  {\"dataset_id\": " + JsonString(id) +
            ", \"measure\": " + JsonString(o.measure) + ", \"value\": " + Num(value) +
            (acc ? ", \"accuracy\": " + Num(*acc) : "") +
            ", \"params\": {\"temperature\": " + Num(o.temp) + "}" +
            (approx ? ", \"approximate\": true" : "") + "}";
  }
  json += "\n]\n";
  if (o.format == "json") {
    std::cout << json;
    if (!o.out.empty()) WriteFile(o.out, json);
  } else {
    std::cout << lines;
    if (!o.out.empty()) WriteFile(o.out, csv);
  }
  return kExitOk;
}

int CmdFit(const Options& o) {
  std::vector<double> x, y;
  SplitPairs(ReadPairs(o.in, o.measure), x, y);
  mde_model model;
  Check(mde_fit_linear(x.data(), y.data(), x.size(), &model));
  char* json = nullptr;
  Check(mde_model_to_json(&model, &json));
  const std::string text(json);
  mde_string_free(json);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    WriteFile(o.out, text);
  }
  return kExitOk;
}

bool LooksLikeLogitCsv(const std::string& path) {
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  return first.rfind("k=", 0) == 0;
}

int CmdPredict(const Options& o) {
  if (o.model.empty()) throw Exit{kExitInput, "predict needs --model"};
  mde_model model;
  Check(mde_model_from_json(ReadFile(o.model).c_str(), &model));

  std::string out = "dataset_id,measure,predicted_accuracy\n";
  std::vector<std::string> tables;
  for (const auto& path : o.in) {
    const bool logits = fs::path(path).extension() != ".csv" || LooksLikeLogitCsv(path);
    if (!logits) {
      tables.push_back(path);
      continue;
    }
    if (o.measure.empty())
      throw Exit{kExitInput, "predicting from logits needs --measure"};
    if (mde_measure_needs_aux(o.measure.c_str()) && o.source.empty())
      throw Exit{kExitMissing, "measure '" + o.measure + "' needs --source"};
    StoreHandle source, store;
    if (!o.source.empty()) Check(mde_store_load(o.source.c_str(), &source.p));
    Check(mde_store_load(path.c_str(), &store.p));
    double value = 0.0;
    Check(mde_compute_measure(o.measure.c_str(), store.p, source.p, o.temp, &value, nullptr));
    out += std::string(mde_store_dataset_id(store.p)) + "," + o.measure + "," +
           Num(mde_predict_accuracy(&model, value)) + "\n";
  }
  for (const auto& row : ReadPairs(tables, o.measure))
    out += row.dataset_id + "," + row.measure + "," +
           Num(mde_predict_accuracy(&model, row.value)) + "\n";
  std::cout << out;
  if (!o.out.empty()) WriteFile(o.out, out);
  return kExitOk;
}

int CmdCorrelate(const Options& o) {
  std::vector<double> x, y;
  SplitPairs(ReadPairs(o.in, o.measure), x, y);
  double r = 0.0, rho = 0.0, r2 = 0.0;
  Check(mde_pearson(x.data(), y.data(), x.size(), &r));
  Check(mde_spearman(x.data(), y.data(), x.size(), &rho));
  mde_model model;
  Check(mde_fit_linear(x.data(), y.data(), x.size(), &model));
  std::vector<double> fitted;
  for (double v : x) fitted.push_back(mde_predict_raw(&model, v));
  Check(mde_r_squared(fitted.data(), y.data(), y.size(), &r2));
  std::string text;
  if (o.format == "json") {
    text = "{\n  \"n\": " + std::to_string(x.size()) + ",\n  \"pearson\": " + Num(r) +
           ",\n  \"spearman\": " + Num(rho) + ",\n  \"r2\": " + Num(r2) + "\n}\n";
  } else {
    text = "n,pearson,spearman,r2\n" + std::to_string(x.size()) + "," + Num(r) + "," +
           Num(rho) + "," + Num(r2) + "\n";
  }
  std::cout << text;
  if (!o.out.empty()) WriteFile(o.out, text);
  return kExitOk;
}

std::string ConfigText(const Options& o) {
  if (!o.config.empty()) return ReadFile(o.config);
  char* json = nullptr;
  Check(mde_config_canonical(&json));
  std::string text(json);
  mde_string_free(json);
  return text;
}

struct ResultHandle {
  mde_result* p = nullptr;
  ~ResultHandle() { mde_result_free(p); }
};

void RunAndWrite(const std::string& config, mde_experiment_kind kind, const Options& o,
                 const fs::path& dir) {
  ResultHandle result;
  Check(mde_experiment_run(config.c_str(), kind, o.seed ? &*o.seed : nullptr,
                           o.temp_given ? &o.temp : nullptr, &result.p));
  fs::create_directories(dir);
  WriteFile(dir / "report.json", mde_result_json(result.p));
  WriteFile(dir / "results.csv", mde_result_csv(result.p));
  WriteFile(dir / "manifest.json", mde_result_manifest(result.p));
  for (std::size_t i = 0; i < mde_result_store_count(result.p); ++i) {
    const mde_store* s = mde_result_store(result.p, i);
    const fs::path file = dir / "datasets" / (std::string(mde_store_dataset_id(s)) + ".aev");
    fs::create_directories(file.parent_path());
    Check(mde_store_save(s, file.string().c_str()));
  }
  std::cout << "wrote " << (dir / "report.json").string() << "\n";
}

std::string NormalizedConfig(const Options& o) {
  const std::string raw = ConfigText(o);
  char* json = nullptr;
  Check(mde_config_normalize(raw.c_str(), &json));
  std::string text(json);
  mde_string_free(json);
  return text;
}

int CmdSynth(const Options& o) {
  if (o.out.empty()) throw Exit{kExitInput, "synth needs --out <directory>"};
  const std::string config = NormalizedConfig(o);
  RunAndWrite(config, MDE_EXPERIMENT_AUTOEVAL, o, o.out);
  WriteFile(fs::path(o.out) / "config.json", config);
  return kExitOk;
}

int CmdStress(const Options& o) {
  if (o.out.empty()) throw Exit{kExitInput, "stress needs --out <directory>"};
  const std::string config = NormalizedConfig(o);
  if (o.mode == "noise" || o.mode == "both")
    RunAndWrite(config, MDE_EXPERIMENT_STRESS_NOISE, o, fs::path(o.out) / "stress_noise");
  if (o.mode == "imbalance" || o.mode == "both")
    RunAndWrite(config, MDE_EXPERIMENT_STRESS_IMBALANCE, o,
                fs::path(o.out) / "stress_imbalance");
  WriteFile(fs::path(o.out) / "config.json", config);
  return kExitOk;
}

int CmdReport(const Options& o) {
  if (o.in.size() != 1) throw Exit{kExitInput, "report needs exactly one --in result JSON"};
  if (o.out.empty()) throw Exit{kExitInput, "report needs --out <file.svg>"};
  mde_report* report = nullptr;
  Check(mde_report_render(ReadFile(o.in[0]).c_str(), &report));
  struct Free {
    mde_report* r;
    ~Free() { mde_report_free(r); }
  } guard{report};

  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < mde_report_count(report); ++i)
    if (o.measure.empty() || o.measure == mde_report_measure(report, i)) chosen.push_back(i);
  if (chosen.empty())
    throw Exit{kExitInput, "result has no measure '" + o.measure + "'"};
  const fs::path out(o.out);
  for (std::size_t i : chosen) {
    fs::path file = out;
    if (chosen.size() > 1)
      file = out.parent_path() / (out.stem().string() + "_" + mde_report_measure(report, i) +
                                  out.extension().string());
    WriteFile(file, mde_report_svg(report, i));
    std::cout << "wrote " << file.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised accuracy estimation from classifier logits"};
  app.require_subcommand(1, 1);
  Options o;

  std::vector<std::string> measure_ids;
  for (std::size_t i = 0; i < mde_measure_count(); ++i)
    measure_ids.emplace_back(mde_measure_name(i));

  std::vector<CLI::Option*> temp_options;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", o.out, "Output path");
    temp_options.push_back(
        cmd->add_option("--temp", o.temp, "Temperature T > 0")->default_val(1.0));
  };

  auto* measure = app.add_subcommand("measure", "Compute one measure on logit files");
  measure->add_option("--in", o.in, "Logit files (.aev or .csv)")->required();
  measure->add_option("--measure", o.measure, "Measure id")
      ->required()
      ->check(CLI::IsMember(measure_ids));
  measure->add_option("--source", o.source, "Auxiliary store (source or partner logits)");
  measure->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  add_common(measure);

  auto* fit = app.add_subcommand("fit", "Fit accuracy on a measure");
  fit->add_option("--in", o.in, "CSV of (measure, accuracy) rows")->required();
  fit->add_option("--measure", o.measure, "Only use rows of this measure");
  add_common(fit);

  auto* predict = app.add_subcommand("predict", "Predict accuracy with a fitted model");
  predict->add_option("--model", o.model, "Model JSON from `fit`")->required();
  predict->add_option("--in", o.in, "Logit files or measure CSVs")->required();
  predict->add_option("--measure", o.measure, "Measure id for logit inputs")
      ->check(CLI::IsMember(measure_ids));
  predict->add_option("--source", o.source, "Auxiliary store");
  add_common(predict);

  auto* correlate = app.add_subcommand("correlate", "Correlation of a measure with accuracy");
  correlate->add_option("--in", o.in, "CSV of (measure, accuracy) rows")->required();
  correlate->add_option("--measure", o.measure, "Only use rows of this measure");
  correlate->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  add_common(correlate);

  auto* synth = app.add_subcommand("synth", "Run the synthetic accuracy-estimation experiment");
  synth->add_option("--config", o.config, "Experiment config JSON (default: canonical)");
  synth->add_option("--seed", o.seed, "Override the config seed");
  add_common(synth);

  auto* stress = app.add_subcommand("stress", "Run the noise and imbalance stress protocols");
  stress->add_option("--config", o.config, "Experiment config JSON (default: canonical)");
  stress->add_option("--seed", o.seed, "Override the config seed");
  stress->add_option("--mode", o.mode, "noise, imbalance or both")
      ->check(CLI::IsMember({"noise", "imbalance", "both"}));
  add_common(stress);

  auto* report = app.add_subcommand("report", "Render SVG scatter plots from a result JSON");
  report->add_option("--in", o.in, "Result JSON written by synth or stress")->required();
  report->add_option("--measure", o.measure, "Only this measure");
  report->add_option("--out", o.out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  for (auto* opt : temp_options) o.temp_given = o.temp_given || opt->count() > 0;

  try {
    if (!(o.temp > 0.0) || !std::isfinite(o.temp))
      throw Exit{kExitInput, "--temp must be a positive finite number"};
    if (*measure) return CmdMeasure(o);
    if (*fit) return CmdFit(o);
    if (*predict) return CmdPredict(o);
    if (*correlate) return CmdCorrelate(o);
    if (*synth) return CmdSynth(o);
    if (*stress) return CmdStress(o);
    if (*report) return CmdReport(o);
  } catch (const Exit& e) {
    std::cerr << "mdeval: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "mdeval: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}
