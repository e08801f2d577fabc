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

#ifndef UQWIZ_ARRAY_H_
#define UQWIZ_ARRAY_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace uqwiz {

// Dense row-major 2-axis array of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  // Nested-list literal, e.g. Matrix{{0.7, 0.3}, {0.1, 0.9}}. Rows must have
  // equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  // Copies the selected rows, in order, into a new matrix.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Dense 3-axis array (inputs x samples x classes). The samples of one input
// are contiguous, so slice(n) is an S x C block.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t inputs, std::size_t samples, std::size_t width, double fill = 0.0);

  std::size_t inputs() const { return inputs_; }
  std::size_t samples() const { return samples_; }
  std::size_t width() const { return width_; }

  double& operator()(std::size_t n, std::size_t s, std::size_t c) {
    return data_[(n * samples_ + s) * width_ + c];
  }
  double operator()(std::size_t n, std::size_t s, std::size_t c) const {
    return data_[(n * samples_ + s) * width_ + c];
  }

  std::span<double> sample(std::size_t n, std::size_t s) {
    return {data_.data() + (n * samples_ + s) * width_, width_};
  }
  std::span<const double> sample(std::size_t n, std::size_t s) const {
    return {data_.data() + (n * samples_ + s) * width_, width_};
  }

  // Stacks equally shaped matrices along the sample axis: result(n, s, c)
  // = parts[s](n, c).
  static Tensor3 stack_samples(std::span<const Matrix> parts);

  // The single-sample view of a 2-axis output, S = 1.
  static Tensor3 from_single(const Matrix& outputs);

  std::span<const double> values() const { return data_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t inputs_ = 0;
  std::size_t samples_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

void to_json(nlohmann::json& j, const Matrix& m);
void from_json(const nlohmann::json& j, Matrix& m);

}  // namespace uqwiz

#endif  // UQWIZ_ARRAY_H_
