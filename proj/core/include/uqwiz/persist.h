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

#ifndef UQWIZ_PERSIST_H_
#define UQWIZ_PERSIST_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "uqwiz/nn.h"

namespace uqwiz {

// .uwm model file, all integers and floats little-endian:
//
//   "UWMODEL1"                      8-byte magic
//   u32 layer_count                 header ...
//   per layer: u8 tag (0 dense, 1 relu, 2 softmax, 3 dropout)
//              dense:   u32 in_dim, u32 out_dim
//              dropout: f64 rate
//   per dense layer: f64 weights (row-major, out x in), f64 biases
//   u64 FNV-1a of header + payload (the magic is not hashed)
//
// The file stores architecture and weights only. A loaded model is a
// stochastic model with the given seed and the stochastic mode off.
inline constexpr char kModelMagic[8] = {'U', 'W', 'M', 'O', 'D', 'E', 'L', '1'};

std::uint64_t fnv1a64(std::span<const std::byte> bytes);

std::vector<std::byte> serialize_model(const SequentialModel& model);

// Throws TruncatedFileError, ChecksumError, UnknownTagError or FormatError.
SequentialModel deserialize_model(std::span<const std::byte> bytes, std::uint64_t seed = 0);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written model.
void save_model(const SequentialModel& model, const std::filesystem::path& path);

SequentialModel load_model(const std::filesystem::path& path, std::uint64_t seed = 0);

// Whole-file helpers; throw IoError.
std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace uqwiz

#endif  // UQWIZ_PERSIST_H_
