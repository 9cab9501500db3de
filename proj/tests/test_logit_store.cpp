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

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "mde/error.hpp"
#include "mde/logit_store.hpp"
#include "oracles.hpp"

using mde::ErrorCode;
using mde::LogitStore;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const mde::Error& e) {
    return e.code();
  }
  FAIL("expected mde::Error");
  return ErrorCode::kInvalidArgument;
}

std::string MessageOf(auto&& fn) {
  try {
    fn();
  } catch (const mde::Error& e) {
    return e.what();
  }
  FAIL("expected mde::Error");
  return "";
}

std::filesystem::path TempPath(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mde_store_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("binary round trip keeps exact doubles") {
  LogitStore s(2, 2, {0.0, 0.0, 1.0, 2.0}, std::vector<std::uint32_t>{0, 1}, "a");
  const auto bytes = mde::EncodeBinary(s);
  CHECK(bytes.size() == 13 + 4 * 8 + 2 * 4);
  CHECK(bytes[0] == 'A');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 2);
  CHECK(bytes[12] == 1);
  const auto back = mde::DecodeBinary(bytes, "a");
  CHECK(back == s);
}

TEST_CASE("unlabeled store writes flag 0 and no label section") {
  LogitStore s(3, 2, {1, 2, 3, 4, 5, 6}, std::nullopt);
  const auto bytes = mde::EncodeBinary(s);
  CHECK(bytes[12] == 0);
  CHECK(bytes.size() == 13 + 6 * 8);
  CHECK_FALSE(mde::DecodeBinary(bytes).has_labels());
}

TEST_CASE("single-row store round trips") {
  LogitStore s(1, 3, {-1.5, 0.25, 7.0}, std::vector<std::uint32_t>{2});
  CHECK(mde::DecodeBinary(mde::EncodeBinary(s)) == s);
  CHECK(mde::DecodeCsv(mde::EncodeCsv(s)) == s);
}

TEST_CASE("randomized stores round trip through both formats") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> nd(1, 40), kd(2, 9);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = nd(rng), k = kd(rng);
    auto s = oracle::RandomStore(rng, n, k, 1e3, t % 2 == 0).with_dataset_id("r");
    CHECK(mde::DecodeBinary(mde::EncodeBinary(s), "r") == s);
    CHECK(mde::DecodeCsv(mde::EncodeCsv(s), "r") == s);
  }
}

TEST_CASE("files round trip and take their stem as dataset id") {
  std::mt19937_64 rng(5);
  auto s = oracle::RandomStore(rng, 7, 3).with_dataset_id("fixture");
  for (auto ext : {".aev", ".csv"}) {
    const auto path = TempPath(std::string("fixture") + ext);
    mde::SaveStore(s, path, mde::FormatFromPath(path));
    CHECK(mde::LoadStore(path, mde::FormatFromPath(path)) == s);
  }
}

TEST_CASE("NaN logit is rejected with its position") {
  std::vector<double> v = {0, 1, 2, std::nan("")};
  auto bytes = mde::EncodeBinary(LogitStore(2, 2, {0, 1, 2, 3}, std::nullopt));
  const auto bits = std::bit_cast<std::uint64_t>(std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < 8; ++i) bytes[13 + 3 * 8 + i] = static_cast<std::uint8_t>(bits >> (8 * i));
  CHECK(CodeOf([&] { mde::DecodeBinary(bytes); }) == ErrorCode::kNonFinite);
  CHECK(MessageOf([&] { mde::DecodeBinary(bytes); }) == "non-finite logit at row 1, col 1");
  CHECK(MessageOf([&] { LogitStore(2, 2, v, std::nullopt); }) ==
        "non-finite logit at row 1, col 1");
  CHECK(MessageOf([&] { mde::DecodeCsv("k=2,labels=no\n0,1\ninf,2\n"); }) ==
        "non-finite logit at row 1, col 0");
}

TEST_CASE("CSV with header k=3,labels=yes and four rows") {
  const auto s = mde::DecodeCsv("k=3,labels=yes\n1,2,3,0\n0,0,0,1\n-1,5,2,2\n3,3,3,0\n");
  CHECK(s.n_samples() == 4);
  CHECK(s.n_classes() == 3);
  CHECK(s.labels()[2] == 2);
  CHECK(s.row(2)[1] == 5.0);
}

TEST_CASE("CSV tolerates CRLF line endings") {
  const auto s = mde::DecodeCsv("k=2,labels=no\r\n1,2\r\n3,4\r\n");
  CHECK(s.n_samples() == 2);
}

TEST_CASE("each malformed input has its own error") {
  SUBCASE("bad magic") {
    std::vector<std::uint8_t> b = {'X', 'E', 'V', '1', 1, 0, 0, 0, 2, 0, 0, 0, 0};
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kMalformedHeader);
  }
  SUBCASE("short header") {
    std::vector<std::uint8_t> b = {'A', 'E', 'V'};
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kMalformedHeader);
  }
  SUBCASE("bad label flag") {
    std::vector<std::uint8_t> b = {'A', 'E', 'V', '1', 1, 0, 0, 0, 2, 0, 0, 0, 7};
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kMalformedHeader);
  }
  SUBCASE("K below two") {
    std::vector<std::uint8_t> b = {'A', 'E', 'V', '1', 1, 0, 0, 0, 1, 0, 0, 0, 0};
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kMalformedHeader);
  }
  SUBCASE("truncated logits name the row") {
    auto b = mde::EncodeBinary(LogitStore(3, 2, {1, 2, 3, 4, 5, 6}, std::nullopt));
    b.resize(13 + 8 * 3);
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kTruncated);
    CHECK(MessageOf([&] { mde::DecodeBinary(b); }).find("logit row 1, col 1") !=
          std::string::npos);
  }
  SUBCASE("truncated labels name the row") {
    auto b = mde::EncodeBinary(
        LogitStore(3, 2, {1, 2, 3, 4, 5, 6}, std::vector<std::uint32_t>{0, 1, 0}));
    b.resize(b.size() - 2);
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kTruncated);
    CHECK(MessageOf([&] { mde::DecodeBinary(b); }).find("label row 2") != std::string::npos);
  }
  SUBCASE("huge declared size does not allocate") {
    std::vector<std::uint8_t> b = {'A', 'E', 'V', '1', 0xff, 0xff, 0xff, 0xff,
                                   0xff, 0xff, 0xff, 0xff, 0};
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kTruncated);
  }
  SUBCASE("trailing bytes") {
    auto b = mde::EncodeBinary(LogitStore(1, 2, {1, 2}, std::nullopt));
    b.push_back(0);
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kMalformedHeader);
  }
  SUBCASE("label out of range") {
    auto b = mde::EncodeBinary(LogitStore(1, 2, {1, 2}, std::vector<std::uint32_t>{1}));
    b.back() = 0;
    b[b.size() - 4] = 5;
    CHECK(CodeOf([&] { mde::DecodeBinary(b); }) == ErrorCode::kLabelOutOfRange);
    CHECK(CodeOf([&] { mde::DecodeCsv("k=2,labels=yes\n0,1,2\n"); }) ==
          ErrorCode::kLabelOutOfRange);
    CHECK(CodeOf([&] { mde::DecodeCsv("k=2,labels=yes\n0,1,-1\n"); }) ==
          ErrorCode::kLabelOutOfRange);
  }
  SUBCASE("CSV header and rows") {
    CHECK(CodeOf([&] { mde::DecodeCsv(""); }) == ErrorCode::kMalformedHeader);
    CHECK(CodeOf([&] { mde::DecodeCsv("classes=2\n1,2\n"); }) == ErrorCode::kMalformedHeader);
    CHECK(CodeOf([&] { mde::DecodeCsv("k=2,labels=maybe\n1,2\n"); }) ==
          ErrorCode::kMalformedHeader);
    CHECK(CodeOf([&] { mde::DecodeCsv("k=2,labels=no\n"); }) == ErrorCode::kTruncated);
    CHECK(CodeOf([&] { mde::DecodeCsv("k=3,labels=no\n1,2\n"); }) == ErrorCode::kTruncated);
    CHECK(CodeOf([&] { mde::DecodeCsv("k=2,labels=no\n1,abc\n"); }) == ErrorCode::kNonFinite);
  }
  SUBCASE("missing file") {
    CHECK(CodeOf([&] {
            mde::LoadStore("/nonexistent/x.aev", mde::StoreFormat::kBinary);
          }) == ErrorCode::kIo);
  }
}

TEST_CASE("true accuracy examples") {
  CHECK(mde::TrueAccuracy(LogitStore(2, 2, {2, 0, 0, 2}, std::vector<std::uint32_t>{0, 1})) ==
        1.0);
  CHECK(mde::TrueAccuracy(LogitStore(2, 2, {2, 0, 0, 2}, std::vector<std::uint32_t>{1, 0})) ==
        0.0);
  CHECK(mde::TrueAccuracy(LogitStore(1, 2, {1, 1}, std::vector<std::uint32_t>{0})) == 1.0);
  CHECK(CodeOf([] { mde::TrueAccuracy(LogitStore(1, 2, {1, 1}, std::nullopt)); }) ==
        ErrorCode::kMissingLabels);
}

TEST_CASE("true accuracy ignores row order and per-row offsets") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto s = oracle::RandomStore(rng, 25, 4);
    const double acc = mde::TrueAccuracy(s);
    std::vector<std::size_t> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> logits, shifted;
    std::vector<std::uint32_t> labels;
    std::uniform_real_distribution<double> c(-50, 50);
    for (std::size_t i : perm) {
      const double offset = c(rng);
      for (double v : s.row(i)) {
        logits.push_back(v);
        shifted.push_back(v + offset);
      }
      labels.push_back(s.labels()[i]);
    }
    CHECK(mde::TrueAccuracy(LogitStore(25, 4, logits, labels)) == acc);
    // Adding an offset can round two logits into a tie, so compare argmaxes
    // rather than demand equality in that rare case.
    const LogitStore moved(25, 4, shifted, labels);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < 25; ++i)
      agree += mde::Argmax(moved.row(i)) == mde::Argmax(LogitStore(25, 4, logits, labels).row(i));
    if (agree == 25) CHECK(mde::TrueAccuracy(moved) == acc);
  }
}

TEST_CASE("constructor validation") {
  CHECK(CodeOf([] { LogitStore(0, 2, {}, std::nullopt); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { LogitStore(1, 1, {0}, std::nullopt); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { LogitStore(2, 2, {0, 1, 2}, std::nullopt); }) ==
        ErrorCode::kShapeMismatch);
  CHECK(CodeOf([] { LogitStore(1, 2, {0, 1}, std::vector<std::uint32_t>{2}); }) ==
        ErrorCode::kLabelOutOfRange);
}

TEST_CASE("measure report validation") {
  mde::MeasureReport r{"d", "mde", 1.0, 0.5, {{"temperature", 1.0}}};
  CHECK_NOTHROW(mde::Validate(r));
  r.accuracy = 1.5;
  CHECK_THROWS_AS(mde::Validate(r), mde::Error);
  r.accuracy = std::nullopt;
  r.value = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(mde::Validate(r), mde::Error);
}
