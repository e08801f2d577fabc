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

#include "uqwiz/array.h"

#include <algorithm>
#include <string>

#include <nlohmann/json.hpp>

#include "uqwiz/errors.h"

namespace uqwiz {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix of " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " given " + std::to_string(data_.size()) + " values");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    std::ranges::copy(row(indices[i]), out.row(i).begin());
  }
  return out;
}

Tensor3::Tensor3(std::size_t inputs, std::size_t samples, std::size_t width, double fill)
    : inputs_(inputs), samples_(samples), width_(width), data_(inputs * samples * width, fill) {}

Tensor3 Tensor3::stack_samples(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  const std::size_t n = parts.front().rows();
  const std::size_t c = parts.front().cols();
  Tensor3 out(n, parts.size(), c);
  for (std::size_t s = 0; s < parts.size(); ++s) {
    if (parts[s].rows() != n || parts[s].cols() != c) {
      throw ShapeError("cannot stack sample " + std::to_string(s) + ": shape " +
                       std::to_string(parts[s].rows()) + "x" + std::to_string(parts[s].cols()) +
                       " differs from " + std::to_string(n) + "x" + std::to_string(c));
    }
    for (std::size_t i = 0; i < n; ++i) std::ranges::copy(parts[s].row(i), out.sample(i, s).begin());
  }
  return out;
}

Tensor3 Tensor3::from_single(const Matrix& outputs) {
  Tensor3 out(outputs.rows(), 1, outputs.cols());
  std::ranges::copy(outputs.values(), out.data_.begin());
  return out;
}

void to_json(nlohmann::json& j, const Matrix& m) {
  j = nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}};
  j["values"] = std::vector<double>(m.values().begin(), m.values().end());
}

void from_json(const nlohmann::json& j, Matrix& m) {
  m = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
             j.at("values").get<std::vector<double>>());
}

}  // namespace uqwiz
