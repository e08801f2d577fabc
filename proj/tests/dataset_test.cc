// Copyright 2026 The uqwiz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "uqwiz/dataset.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "uqwiz/errors.h"
#include "uqwiz/evaluation.h"
#include "uqwiz/nn.h"

namespace uqwiz {
namespace {

namespace fs = std::filesystem;

class CsvFile : public ::testing::Test {
 protected:
  void SetUp() override {
    path_ = fs::temp_directory_path() / ("uqwiz_csv_" + std::to_string(std::random_device{}()) + ".csv");
  }
  void TearDown() override { fs::remove(path_); }

  const fs::path& write(const std::string& text) {
    std::ofstream(path_) << text;
    return path_;
  }

  fs::path path_;
};

TEST(GenerateBlobs, Deterministic) {
  const auto a = generate_blobs(50, 3, 0.5, 4);
  const auto b = generate_blobs(50, 3, 0.5, 4);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(generate_blobs(50, 3, 0.5, 5).features, a.features);
  EXPECT_EQ(a.num_classes, 3u);
  EXPECT_EQ(generate_blobs(10, 2, 0.5, 1, 5).features.cols(), 5u);
}

TEST(GenerateBlobs, BalancedLabels) {
  const auto d = generate_blobs(300, 3, 1.0, 8);
  std::vector<std::size_t> counts(3, 0);
  for (auto l : d.labels) ++counts[l];
  EXPECT_EQ(counts, (std::vector<std::size_t>{100, 100, 100}));

  for (std::size_t n : {7u, 31u, 100u}) {
    for (std::size_t c : {2u, 3u, 5u}) {
      std::vector<std::size_t> k(c, 0);
      for (auto l : generate_blobs(n, c, 1.0, n).labels) ++k[l];
      const auto [lo, hi] = std::minmax_element(k.begin(), k.end());
      EXPECT_LE(*hi - *lo, 1u);
    }
  }
}

TEST(GenerateBlobs, TinySpreadIsLinearlySeparable) {
  const auto d = generate_blobs(200, 4, 1e-3, 12);
  auto model = build_sequential({LayerSpec::dense(2, 4), LayerSpec::softmax()}, 12);
  TrainConfig config;
  config.epochs = 100;
  config.learning_rate = 0.5;
  fit(model, d.features, d.labels, config);
  const auto r = max_softmax(model.forward(d.features));
  EXPECT_EQ(accuracy(r.classes, d.labels), 1.0);
}

TEST(GenerateBlobs, RejectsInvalidArguments) {
  EXPECT_THROW(generate_blobs(10, 2, 0.0, 1), ValidationError);
  EXPECT_THROW(generate_blobs(10, 2, -1.0, 1), ValidationError);
  EXPECT_THROW(generate_blobs(10, 1, 1.0, 1), ValidationError);
}

TEST(Dataset, SliceKeepsRowsAndLabels) {
  const auto d = generate_blobs(10, 2, 0.5, 1);
  const auto s = d.slice(3, 4);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.labels, std::vector<std::size_t>(d.labels.begin() + 3, d.labels.begin() + 7));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(std::ranges::equal(s.features.row(i), d.features.row(i + 3)));
  }
}

TEST(LoadCsv, TwoRowFixture) {
  const auto d = load_csv(fs::path(UQWIZ_FIXTURE_DIR) / "two_rows.csv");
  EXPECT_EQ(d.features, (Matrix{{0.25, -1.5}, {300.0, 0.125}}));
  EXPECT_EQ(d.labels, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(d.num_classes, 2u);
}

TEST_F(CsvFile, HeaderOnlyIsEmpty) {
  const auto d = load_csv(write("a,b,label\n"));
  EXPECT_EQ(d.size(), 0u);
  EXPECT_EQ(d.features.cols(), 2u);
}

TEST_F(CsvFile, UnparsableCellReportsPosition) {
  try {
    load_csv(write("a,b,c,label\n1,2,abc,0\n"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST_F(CsvFile, RejectsRaggedRows) {
  try {
    load_csv(write("a,b,label\n1,2,0\n1,0\n"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
  }
}

TEST_F(CsvFile, RejectsMissingLabelColumnAndBadLabels) {
  EXPECT_THROW(load_csv(write("a,b,target\n1,2,0\n")), ParseError);
  EXPECT_THROW(load_csv(write("a,label\n1,-1\n")), ParseError);
  EXPECT_THROW(load_csv(write("a,label\n1,0.5\n")), ParseError);
}

TEST_F(CsvFile, CustomDelimiter) {
  CsvSchema schema;
  schema.delimiter = ';';
  const auto d = load_csv(write("a;label\n1.5;2\n"), schema);
  EXPECT_EQ(d.features, (Matrix{{1.5}}));
  EXPECT_EQ(d.labels, std::vector<std::size_t>{2});
}

TEST(LoadCsv, MissingFileIsIoError) {
  EXPECT_THROW(load_csv("/nonexistent/uqwiz.csv"), IoError);
}

}  // namespace
}  // namespace uqwiz
