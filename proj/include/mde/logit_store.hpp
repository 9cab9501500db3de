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

// Logit containers and their on-disk formats.
//
// A LogitStore is an N x K row-major matrix of pre-softmax classifier outputs
// with optional integer labels. Every measure in this library is a function of
// one or two stores, so where the logits came from (a file, the synthetic lab)
// does not matter downstream.
//
// Binary `.aev` layout, all little-endian:
//
//   "AEV1" | u32 N | u32 K | u8 label_flag | N*K f64 logits | [N u32 labels]
//
// CSV layout: a header line `k=<K>,labels=<yes|no>`, then one line per sample
// with K comma-separated logits and, when labels=yes, a trailing label.

#ifndef MDE_LOGIT_STORE_HPP_
#define MDE_LOGIT_STORE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mde {

class LogitStore {
 public:
  // Validates shape, finiteness and label range. Throws mde::Error.
  LogitStore(std::size_t n_samples, std::size_t n_classes,
             std::vector<double> logits,
             std::optional<std::vector<std::uint32_t>> labels,
             std::string dataset_id = "");

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_classes() const { return n_classes_; }
  const std::string& dataset_id() const { return dataset_id_; }
  bool has_labels() const { return labels_.has_value(); }

  std::span<const double> logits() const { return logits_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(logits_).subspan(i * n_classes_,
                                                    n_classes_);
  }
  // Throws kMissingLabels when the store is unlabeled.
  std::span<const std::uint32_t> labels() const;

  LogitStore with_dataset_id(std::string id) const;

  friend bool operator==(const LogitStore&, const LogitStore&) = default;

 private:
  std::size_t n_samples_;
  std::size_t n_classes_;
  std::vector<double> logits_;
  std::optional<std::vector<std::uint32_t>> labels_;
  std::string dataset_id_;
};

enum class StoreFormat { kBinary, kCsv };

// Picks the format from the file extension: ".csv" is CSV, anything else is
// the binary format.
StoreFormat FormatFromPath(const std::filesystem::path& path);

// The loaded store's dataset_id is the file stem.
LogitStore LoadStore(const std::filesystem::path& path, StoreFormat format);
void SaveStore(const LogitStore& store, const std::filesystem::path& path,
               StoreFormat format);

// In-memory codecs behind LoadStore/SaveStore.
std::vector<std::uint8_t> EncodeBinary(const LogitStore& store);
LogitStore DecodeBinary(std::span<const std::uint8_t> bytes,
                        std::string dataset_id = "");
std::string EncodeCsv(const LogitStore& store);
LogitStore DecodeCsv(const std::string& text, std::string dataset_id = "");

// Index of the largest entry; ties go to the lowest index.
std::size_t Argmax(std::span<const double> values);

// Fraction of samples whose argmax equals the label. Requires labels.
double TrueAccuracy(const LogitStore& store);

// One dataset's value for one measure.
struct MeasureReport {
  std::string dataset_id;
  std::string measure_name;
  double value = 0.0;
  std::optional<double> accuracy;
  std::map<std::string, double> params;
};

// Throws kInvalidArgument if the value is not finite or the accuracy is
// outside [0, 1].
void Validate(const MeasureReport& report);

}  // namespace mde

#endif  // MDE_LOGIT_STORE_HPP_
