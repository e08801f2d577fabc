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

#ifndef UQWIZ_TOOLS_CLI_SUPPORT_H_
#define UQWIZ_TOOLS_CLI_SUPPORT_H_

#include <cstdint>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "uqwiz/context.h"
#include "uqwiz/dataset.h"
#include "uqwiz/nn.h"

namespace uqwiz::cli {

// A malformed command line. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hidden layer plan from "dense:<h1>,<h2>,... dropout:<p>".
struct Architecture {
  std::vector<std::size_t> hidden;
  double dropout = 0.0;
};

Architecture parse_arch(std::string_view text);

// Hidden dense+relu(+dropout) blocks followed by dense(num_classes) and softmax.
std::vector<LayerSpec> classifier_layers(const Architecture& arch, std::size_t input_dim,
                                         std::size_t num_classes);

// "blobs:<N>,<C>,<spread>" or a CSV path.
Dataset load_dataset(std::string_view source, std::uint64_t seed);

// "none", "dynamic_growth" or "device_allocator:<id>=<capacity>,...".
std::shared_ptr<const ContextHandler> parse_context(std::string_view text,
                                                    std::size_t num_processes);

// "0,2,4".
std::vector<std::size_t> parse_count_list(std::string_view text);

// Rows share the column set of `columns`; values are strings, numbers,
// booleans or null.
struct Table {
  std::vector<std::string> columns;
  std::vector<nlohmann::ordered_json> rows;
};

std::string csv_field(std::string_view text);
void write_csv(std::ostream& out, const Table& table);
// One top-level array of row objects.
void write_json(std::ostream& out, const Table& table);

}  // namespace uqwiz::cli

#endif  // UQWIZ_TOOLS_CLI_SUPPORT_H_
