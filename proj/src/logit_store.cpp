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

#include "mde/logit_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "mde/error.hpp"
#include "text_util.hpp"

namespace mde {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformedHeader: return "malformed_header";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kLabelOutOfRange: return "label_out_of_range";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kMissingLabels: return "missing_labels";
    case ErrorCode::kMissingInput: return "missing_input";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

namespace {

constexpr char kMagic[4] = {'A', 'E', 'V', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 1;

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double GetF64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

LogitStore::LogitStore(std::size_t n_samples, std::size_t n_classes,
                       std::vector<double> logits,
                       std::optional<std::vector<std::uint32_t>> labels,
                       std::string dataset_id)
    : n_samples_(n_samples),
      n_classes_(n_classes),
      logits_(std::move(logits)),
      labels_(std::move(labels)),
      dataset_id_(std::move(dataset_id)) {
  if (n_samples_ < 1)
    throw Error(ErrorCode::kInvalidArgument, "store needs at least one sample");
  if (n_classes_ < 2)
    throw Error(ErrorCode::kInvalidArgument,
                "store needs at least two classes, got " +
                    std::to_string(n_classes_));
  if (logits_.size() != n_samples_ * n_classes_)
    throw Error(ErrorCode::kShapeMismatch,
                "logit buffer has " + std::to_string(logits_.size()) +
                    " entries, expected " +
                    std::to_string(n_samples_ * n_classes_));
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    if (!std::isfinite(logits_[i]))
      throw Error(ErrorCode::kNonFinite,
                  "non-finite logit at row " + std::to_string(i / n_classes_) +
                      ", col " + std::to_string(i % n_classes_));
  }
  if (labels_) {
    if (labels_->size() != n_samples_)
      throw Error(ErrorCode::kShapeMismatch,
                  "label count " + std::to_string(labels_->size()) +
                      " does not match " + std::to_string(n_samples_) +
                      " samples");
    for (std::size_t i = 0; i < n_samples_; ++i) {
      if ((*labels_)[i] >= n_classes_)
        throw Error(ErrorCode::kLabelOutOfRange,
                    "label out of range at row " + std::to_string(i) + ": " +
                        std::to_string((*labels_)[i]) +
                        " >= " + std::to_string(n_classes_));
    }
  }
}

std::span<const std::uint32_t> LogitStore::labels() const {
  if (!labels_)
    throw Error(ErrorCode::kMissingLabels,
                "dataset '" + dataset_id_ + "' has no labels");
  return *labels_;
}

LogitStore LogitStore::with_dataset_id(std::string id) const {
  LogitStore copy = *this;
  copy.dataset_id_ = std::move(id);
  return copy;
}

StoreFormat FormatFromPath(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? StoreFormat::kCsv : StoreFormat::kBinary;
}

std::vector<std::uint8_t> EncodeBinary(const LogitStore& store) {
  if (store.n_samples() > std::numeric_limits<std::uint32_t>::max() ||
      store.n_classes() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::kInvalidArgument, "store too large for .aev");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + store.logits().size() * 8 +
              (store.has_labels() ? store.n_samples() * 4 : 0));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutU32(out, static_cast<std::uint32_t>(store.n_samples()));
  PutU32(out, static_cast<std::uint32_t>(store.n_classes()));
  out.push_back(store.has_labels() ? 1 : 0);
  for (double v : store.logits()) PutF64(out, v);
  if (store.has_labels())
    for (std::uint32_t label : store.labels()) PutU32(out, label);
  return out;
}

LogitStore DecodeBinary(std::span<const std::uint8_t> bytes,
                        std::string dataset_id) {
  if (bytes.size() < kHeaderBytes)
    throw Error(ErrorCode::kMalformedHeader,
                "malformed header: " + std::to_string(bytes.size()) +
                    " bytes, need at least " + std::to_string(kHeaderBytes));
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::kMalformedHeader, "malformed header: bad magic");
  const std::uint32_t n = GetU32(bytes.data() + 4);
  const std::uint32_t k = GetU32(bytes.data() + 8);
  const std::uint8_t flag = bytes[12];
  if (flag > 1)
    throw Error(ErrorCode::kMalformedHeader,
                "malformed header: label flag " + std::to_string(flag));
  if (n < 1 || k < 2)
    throw Error(ErrorCode::kMalformedHeader,
                "malformed header: N=" + std::to_string(n) +
                    " K=" + std::to_string(k));

  const std::size_t cells = static_cast<std::size_t>(n) * k;
  const std::size_t expected =
      kHeaderBytes + cells * 8 + (flag ? static_cast<std::size_t>(n) * 4 : 0);
  if (bytes.size() < expected) {
    const std::size_t have = bytes.size() - kHeaderBytes;
    if (have < cells * 8) {
      const std::size_t i = have / 8;
      throw Error(ErrorCode::kTruncated,
                  "truncated payload at logit row " + std::to_string(i / k) +
                      ", col " + std::to_string(i % k) + " (" +
                      std::to_string(bytes.size()) + " of " +
                      std::to_string(expected) + " bytes)");
    }
    throw Error(ErrorCode::kTruncated,
                "truncated payload at label row " +
                    std::to_string((have - cells * 8) / 4) + " (" +
                    std::to_string(bytes.size()) + " of " +
                    std::to_string(expected) + " bytes)");
  }
  std::size_t offset = kHeaderBytes;
  std::vector<double> logits(cells);
  for (std::size_t i = 0; i < cells; ++i, offset += 8)
    logits[i] = GetF64(bytes.data() + offset);
  std::optional<std::vector<std::uint32_t>> labels;
  if (flag) {
    labels.emplace(n);
    for (std::size_t i = 0; i < n; ++i, offset += 4)
      (*labels)[i] = GetU32(bytes.data() + offset);
  }
  if (offset != bytes.size())
    throw Error(ErrorCode::kMalformedHeader,
                "trailing bytes: file has " + std::to_string(bytes.size()) +
                    " bytes, header implies " + std::to_string(expected));
  return LogitStore(n, k, std::move(logits), std::move(labels),
                    std::move(dataset_id));
}

std::string EncodeCsv(const LogitStore& store) {
  std::string out = "k=" + std::to_string(store.n_classes()) +
                    ",labels=" + (store.has_labels() ? "yes" : "no") + "\n";
  for (std::size_t i = 0; i < store.n_samples(); ++i) {
    auto row = store.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += internal::FormatDouble(row[j]);
    }
    if (store.has_labels()) {
      out += ',';
      out += std::to_string(store.labels()[i]);
    }
    out += '\n';
  }
  return out;
}

LogitStore DecodeCsv(const std::string& text, std::string dataset_id) {
  auto lines = internal::SplitLines(text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty())
    throw Error(ErrorCode::kMalformedHeader, "malformed header: empty file");

  auto header = internal::SplitFields(lines[0]);
  if (header.size() != 2 || !header[0].starts_with("k=") ||
      !header[1].starts_with("labels="))
    throw Error(ErrorCode::kMalformedHeader,
                "malformed header: expected 'k=<K>,labels=<yes|no>', got '" +
                    std::string(lines[0]) + "'");
  std::size_t k = 0;
  {
    auto digits = header[0].substr(2);
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || k < 2)
      throw Error(ErrorCode::kMalformedHeader,
                  "malformed header: bad class count '" + std::string(digits) +
                      "'");
  }
  const auto flag = header[1].substr(7);
  bool has_labels = false;
  if (flag == "yes") {
    has_labels = true;
  } else if (flag != "no") {
    throw Error(ErrorCode::kMalformedHeader,
                "malformed header: labels must be yes or no, got '" +
                    std::string(flag) + "'");
  }

  const std::size_t n = lines.size() - 1;
  if (n == 0)
    throw Error(ErrorCode::kTruncated, "truncated payload: no sample rows");
  std::vector<double> logits;
  logits.reserve(n * k);
  std::optional<std::vector<std::uint32_t>> labels;
  if (has_labels) labels.emplace();
  for (std::size_t r = 0; r < n; ++r) {
    auto fields = internal::SplitFields(lines[r + 1]);
    const std::size_t want = k + (has_labels ? 1 : 0);
    if (fields.size() != want)
      throw Error(fields.size() < want ? ErrorCode::kTruncated
                                       : ErrorCode::kMalformedHeader,
                  "row " + std::to_string(r) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(want));
    for (std::size_t c = 0; c < k; ++c) {
      auto value = internal::ParseDouble(fields[c]);
      if (!value)
        throw Error(ErrorCode::kNonFinite,
                    "unparseable logit at row " + std::to_string(r) +
                        ", col " + std::to_string(c) + ": '" +
                        std::string(fields[c]) + "'");
      if (!std::isfinite(*value))
        throw Error(ErrorCode::kNonFinite,
                    "non-finite logit at row " + std::to_string(r) +
                        ", col " + std::to_string(c));
      logits.push_back(*value);
    }
    if (has_labels) {
      auto field = fields[k];
      std::int64_t label = -1;
      auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), label);
      if (ec != std::errc() || ptr != field.data() + field.size() ||
          label < 0 || static_cast<std::uint64_t>(label) >= k)
        throw Error(ErrorCode::kLabelOutOfRange,
                    "label out of range at row " + std::to_string(r) + ": '" +
                        std::string(field) + "'");
      labels->push_back(static_cast<std::uint32_t>(label));
    }
  }
  return LogitStore(n, k, std::move(logits), std::move(labels),
                    std::move(dataset_id));
}

LogitStore LoadStore(const std::filesystem::path& path, StoreFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const std::string id = path.stem().string();
  try {
    if (format == StoreFormat::kBinary) return DecodeBinary(bytes, id);
    return DecodeCsv(std::string(bytes.begin(), bytes.end()), id);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void SaveStore(const LogitStore& store, const std::filesystem::path& path,
               StoreFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  if (format == StoreFormat::kBinary) {
    auto bytes = EncodeBinary(store);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  } else {
    out << EncodeCsv(store);
  }
  if (!out)
    throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::size_t Argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < values.size(); ++j)
    if (values[j] > values[best]) best = j;
  return best;
}

double TrueAccuracy(const LogitStore& store) {
  auto labels = store.labels();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < store.n_samples(); ++i)
    if (Argmax(store.row(i)) == labels[i]) ++correct;
  return static_cast<double>(correct) /
         static_cast<double>(store.n_samples());
}

void Validate(const MeasureReport& report) {
  if (!std::isfinite(report.value))
    throw Error(ErrorCode::kNonFinite,
                "measure '" + report.measure_name + "' on '" +
                    report.dataset_id + "' is not finite");
  if (report.accuracy && !(*report.accuracy >= 0.0 && *report.accuracy <= 1.0))
    throw Error(ErrorCode::kInvalidArgument,
                "accuracy outside [0, 1] for '" + report.dataset_id + "'");
}

}  // namespace mde
