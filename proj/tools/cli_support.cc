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

#include "cli_support.h"

#include <charconv>
#include <cmath>
#include <filesystem>

namespace uqwiz::cli {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(sep, start);
    parts.push_back(text.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw UsageError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Architecture parse_arch(std::string_view text) {
  Architecture arch;
  bool saw_dense = false;
  for (std::string_view token : split(text, ' ')) {
    if (token.empty()) continue;
    const auto colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw UsageError("architecture token '" + std::string(token) + "' lacks ':'");
    }
    const auto key = token.substr(0, colon);
    const auto value = token.substr(colon + 1);
    if (key == "dense") {
      for (auto width : split(value, ',')) {
        const auto h = parse_number<std::size_t>(width, "dense width");
        if (h == 0) throw UsageError("dense width must be positive");
        arch.hidden.push_back(h);
      }
      saw_dense = true;
    } else if (key == "dropout") {
      arch.dropout = parse_number<double>(value, "dropout rate");
      if (!(arch.dropout >= 0.0 && arch.dropout < 1.0)) {
        throw UsageError("dropout rate must be in [0, 1)");
      }
    } else {
      throw UsageError("unknown architecture key '" + std::string(key) + "'");
    }
  }
  if (!saw_dense) throw UsageError("architecture needs a dense:<widths> token");
  return arch;
}

std::vector<LayerSpec> classifier_layers(const Architecture& arch, std::size_t input_dim,
                                         std::size_t num_classes) {
  std::vector<LayerSpec> layers;
  std::size_t width = input_dim;
  for (std::size_t h : arch.hidden) {
    layers.push_back(LayerSpec::dense(width, h));
    layers.push_back(LayerSpec::relu());
    if (arch.dropout > 0.0) layers.push_back(LayerSpec::dropout(arch.dropout));
    width = h;
  }
  layers.push_back(LayerSpec::dense(width, num_classes));
  layers.push_back(LayerSpec::softmax());
  return layers;
}

Dataset load_dataset(std::string_view source, std::uint64_t seed) {
  constexpr std::string_view kBlobs = "blobs:";
  if (source.starts_with(kBlobs)) {
    const auto parts = split(source.substr(kBlobs.size()), ',');
    if (parts.size() != 3) throw UsageError("expected blobs:<N>,<C>,<spread>");
    const auto n = parse_number<std::size_t>(parts[0], "blob count");
    const auto c = parse_number<std::size_t>(parts[1], "class count");
    const auto spread = parse_number<double>(parts[2], "spread");
    if (n == 0 || c < 2 || !(spread > 0.0)) {
      throw UsageError("blobs need N > 0, C >= 2 and spread > 0");
    }
    return generate_blobs(n, c, spread, seed);
  }
  if (!std::filesystem::exists(source)) {
    throw UsageError("dataset '" + std::string(source) + "' is neither blobs:... nor a file");
  }
  return load_csv(std::filesystem::path(source));
}

std::shared_ptr<const ContextHandler> parse_context(std::string_view text,
                                                    std::size_t num_processes) {
  if (text.empty()) return default_context(num_processes);
  if (text == "none") return none_context();
  if (text == "dynamic_growth") return dynamic_growth_context();
  constexpr std::string_view kDevices = "device_allocator:";
  if (text.starts_with(kDevices)) {
    std::vector<DeviceSlot> slots;
    for (auto entry : split(text.substr(kDevices.size()), ',')) {
      const auto eq = entry.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw UsageError("device slot '" + std::string(entry) + "' is not <id>=<capacity>");
      }
      slots.push_back({std::string(entry.substr(0, eq)),
                       parse_number<std::size_t>(entry.substr(eq + 1), "slot capacity"), ""});
      if (slots.back().capacity == 0) throw UsageError("slot capacity must be positive");
    }
    return device_allocator_context(std::move(slots));
  }
  throw UsageError("unknown context '" + std::string(text) +
                   "' (none, dynamic_growth, device_allocator:<id>=<capacity>,...)");
}

std::vector<std::size_t> parse_count_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) out.push_back(parse_number<std::size_t>(part, "count"));
  return out;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_csv(std::ostream& out, const Table& table) {
  const auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out << ',';
      out << csv_field(fields[i]);
    }
    out << "\r\n";
  };
  line(table.columns);
  for (const auto& row : table.rows) {
    std::vector<std::string> fields;
    for (const auto& col : table.columns) {
      const auto& v = row.at(col);
      if (v.is_null()) {
        fields.emplace_back();
      } else if (v.is_string()) {
        fields.push_back(v.get<std::string>());
      } else {
        fields.push_back(v.dump());
      }
    }
    line(fields);
  }
}

void write_json(std::ostream& out, const Table& table) {
  nlohmann::ordered_json array = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) array.push_back(row);
  out << array.dump(2) << '\n';
}

}  // namespace uqwiz::cli
