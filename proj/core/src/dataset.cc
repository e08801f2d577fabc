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

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string_view>

#include "uqwiz/errors.h"
#include "uqwiz/random.h"

namespace uqwiz {
namespace {

constexpr double kCenterRadius = 5.0;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(delimiter, start);
    cells.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw ParseError("cannot parse '" + std::string(cell) + "' as a number at row " +
                         std::to_string(row) + ", column " + std::to_string(column),
                     row, column);
  }
  return value;
}

}  // namespace

Dataset Dataset::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > size()) throw ShapeError("dataset slice out of range");
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = begin + i;
  Dataset out;
  out.features = features.select_rows(idx);
  out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    labels.begin() + static_cast<std::ptrdiff_t>(begin + count));
  out.num_classes = num_classes;
  return out;
}

Dataset generate_blobs(std::size_t num_points, std::size_t num_classes, double spread,
                       std::uint64_t seed, std::size_t dims) {
  if (num_classes < 2) throw ValidationError("blobs need at least 2 classes");
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    throw ValidationError("blob spread must be positive, got " + std::to_string(spread));
  }
  if (dims < 2) throw ValidationError("blobs need at least 2 dimensions");

  Engine center_engine = make_engine(derive_seed(seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(num_classes);
  const double rotation = unit(center_engine) * 2.0 * std::numbers::pi;
  Matrix centers(num_classes, dims);
  for (std::size_t k = 0; k < num_classes; ++k) {
    const double jitter = (unit(center_engine) - 0.5) * step / 4.0;
    const double angle = rotation + static_cast<double>(k) * step + jitter;
    centers(k, 0) = kCenterRadius * std::cos(angle);
    centers(k, 1) = kCenterRadius * std::sin(angle);
    for (std::size_t d = 2; d < dims; ++d) centers(k, d) = unit(center_engine) * 4.0 - 2.0;
  }

  Engine point_engine = make_engine(derive_seed(seed, 2));
  std::normal_distribution<double> noise(0.0, spread);
  Dataset data;
  data.num_classes = num_classes;
  data.features = Matrix(num_points, dims);
  data.labels.resize(num_points);
  for (std::size_t i = 0; i < num_points; ++i) {
    const std::size_t label = i % num_classes;
    data.labels[i] = label;
    for (std::size_t d = 0; d < dims; ++d) data.features(i, d) = centers(label, d) + noise(point_engine);
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header row", 1, 1);
  const auto header = split(line, schema.delimiter);
  if (header.back() != schema.label_column) {
    throw ParseError("missing label column: last header cell must be '" + schema.label_column + "'",
                     1, header.size());
  }
  const std::size_t num_features = header.size() - 1;

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t row = 1;
  std::size_t max_label = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, schema.delimiter);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(header.size()),
                       row, cells.size());
    }
    for (std::size_t c = 0; c < num_features; ++c) values.push_back(parse_cell(cells[c], row, c + 1));
    const double label = parse_cell(cells.back(), row, cells.size());
    if (!(label >= 0.0) || label != std::floor(label)) {
      throw ParseError("label '" + std::string(cells.back()) + "' at row " + std::to_string(row) +
                           " is not a non-negative integer",
                       row, cells.size());
    }
    labels.push_back(static_cast<std::size_t>(label));
    max_label = std::max(max_label, labels.back());
  }

  Dataset data;
  data.features = Matrix(labels.size(), num_features, std::move(values));
  data.labels = std::move(labels);
  data.num_classes = data.labels.empty() ? 0 : max_label + 1;
  return data;
}

}  // namespace uqwiz
