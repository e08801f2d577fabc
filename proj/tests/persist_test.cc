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

#include "uqwiz/persist.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string_view>

#include "uqwiz/errors.h"

namespace uqwiz {
namespace {

namespace fs = std::filesystem;

// Written independently by tests/oracles/make_model_fixture.py.
const fs::path kTinyModel = fs::path(UQWIZ_FIXTURE_DIR) / "tiny.uwm";
constexpr double kTinyOutputs[2][2] = {{0.8099984339846871, 0.19000156601531298},
                                       {0.3665897363221599, 0.6334102636778401}};

std::vector<std::byte> bytes_of(std::string_view s) {
  std::vector<std::byte> out;
  for (char c : s) out.push_back(static_cast<std::byte>(c));
  return out;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("uqwiz_persist_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

SequentialModel random_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> width(1, 6);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> rate(0.0, 0.9);
  std::vector<LayerSpec> specs;
  std::size_t in = width(rng);
  const std::size_t depth = 1 + rng() % 3;
  for (std::size_t d = 0; d < depth; ++d) {
    const std::size_t out = width(rng) + 1;
    specs.push_back(LayerSpec::dense(in, out));
    if (coin(rng)) specs.push_back(LayerSpec::relu());
    if (coin(rng)) specs.push_back(LayerSpec::dropout(rate(rng)));
    in = out;
  }
  if (coin(rng)) specs.push_back(LayerSpec::softmax());
  auto model = build_sequential(std::move(specs), rng());
  // Random biases so they take part in the round trip.
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < model.num_layers(); ++i) {
    if (model.layer(i).kind != LayerKind::kDense) continue;
    auto b = model.layer(i).biases;
    for (double& v : b) v = normal(rng);
    model.set_parameters(i, model.layer(i).weights, std::move(b));
  }
  return model;
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64(bytes_of("a")), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64(bytes_of("foobar")), 0x85944171f73967e8ULL);
}

TEST(ModelFile, LoadsCommittedFixture) {
  auto model = load_model(kTinyModel);
  ASSERT_EQ(model.num_layers(), 5u);
  EXPECT_EQ(model.layer(0).kind, LayerKind::kDense);
  EXPECT_EQ(model.layer(1).kind, LayerKind::kRelu);
  EXPECT_EQ(model.layer(2).kind, LayerKind::kDropout);
  EXPECT_EQ(model.layer(2).rate, 0.25);
  EXPECT_EQ(model.layer(3).kind, LayerKind::kDense);
  EXPECT_EQ(model.layer(4).kind, LayerKind::kSoftmax);
  EXPECT_EQ(model.layer(0).weights, (Matrix{{0.5, -0.25}, {1.0, 0.75}, {-0.5, 0.125}}));
  EXPECT_EQ(model.layer(3).biases, (std::vector<double>{0.05, -0.05}));
  EXPECT_TRUE(model.is_stochastic());
  EXPECT_FALSE(model.stochastic_mode());

  const auto out = model.forward(Matrix{{0.5, -1.0}, {2.0, 0.25}});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(out(i, c), kTinyOutputs[i][c], 1e-15);
  }
}

TEST(ModelFile, SerializerReproducesFixtureBytes) {
  const auto original = read_file(kTinyModel);
  EXPECT_EQ(serialize_model(deserialize_model(original)), original);
}

TEST(ModelFile, RandomModelsRoundTripBitExactly) {
  TempDir dir;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    auto model = random_model(rng);
    const fs::path path = dir.path() / ("m" + std::to_string(trial) + ".uwm");
    save_model(model, path);
    auto loaded = load_model(path, model.seed());
    EXPECT_EQ(loaded, model);
    Matrix x(5, model.input_dim());
    for (double& v : x.values()) v = 10.0 * normal(rng);
    EXPECT_EQ(loaded.forward(x), model.forward(x));
    // Same seed and call order: sampled passes replay too.
    StochasticModeScope a(model, true);
    StochasticModeScope b(loaded, true);
    EXPECT_EQ(loaded.forward(x), model.forward(x));
  }
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator()), 100);
}

TEST(ModelFile, FlippedPayloadByteIsChecksumError) {
  const auto original = read_file(kTinyModel);
  // Header is 8 magic + 4 count + 9 + 1 + 9 + 9 + 1 bytes; payload follows.
  constexpr std::size_t kPayloadStart = 8 + 4 + 9 + 1 + 9 + 9 + 1;
  for (std::size_t pos = kPayloadStart; pos < original.size(); ++pos) {
    auto damaged = original;
    damaged[pos] ^= std::byte{0x10};
    EXPECT_THROW(deserialize_model(damaged), ChecksumError) << "byte " << pos;
  }
}

TEST(ModelFile, DistinctCorruptionKinds) {
  const auto original = read_file(kTinyModel);
  EXPECT_THROW(deserialize_model({}), TruncatedFileError);
  for (std::size_t len = 0; len < original.size(); ++len) {
    EXPECT_THROW(deserialize_model(std::span(original).first(len)), TruncatedFileError) << len;
  }

  auto bad_tag = original;
  bad_tag[12] = std::byte{9};
  EXPECT_THROW(deserialize_model(bad_tag), UnknownTagError);

  auto bad_magic = original;
  bad_magic[0] = std::byte{'X'};
  try {
    deserialize_model(bad_magic);
    FAIL() << "expected FormatError";
  } catch (const ChecksumError&) {
    FAIL() << "bad magic reported as checksum error";
  } catch (const FormatError&) {
  }

  auto extra = original;
  extra.push_back(std::byte{0});
  EXPECT_THROW(deserialize_model(extra), FormatError);
}

TEST(ModelFile, EmptyFileIsTruncated) {
  TempDir dir;
  const fs::path empty = dir.path() / "empty.uwm";
  write_file_atomic(empty, {});
  EXPECT_THROW(load_model(empty), TruncatedFileError);
}

TEST(ModelFile, IoErrors) {
  TempDir dir;
  EXPECT_THROW(load_model(dir.path() / "missing.uwm"), IoError);
  const auto model = build_sequential({LayerSpec::dense(2, 2)}, 0);
  EXPECT_THROW(save_model(model, dir.path() / "no" / "such" / "dir.uwm"), IoError);
}

TEST(ModelFile, AtomicWriteLeavesNoTemporaries) {
  TempDir dir;
  const auto model = build_sequential({LayerSpec::dense(2, 2)}, 0);
  const fs::path path = dir.path() / "m.uwm";
  save_model(model, path);
  save_model(model, path);
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(dir.path())) names.push_back(e.path().filename());
  EXPECT_EQ(names, std::vector<fs::path>{"m.uwm"});
}

}  // namespace
}  // namespace uqwiz
