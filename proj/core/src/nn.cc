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

#include "uqwiz/nn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "layers_internal.h"
#include "uqwiz/errors.h"

namespace uqwiz {
namespace {

// Stream ids under the model seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

void validate_layers(std::vector<LayerSpec>& layers, std::uint64_t seed) {
  if (layers.empty()) throw ConstructionError("model needs at least one layer");
  std::size_t width = 0;  // 0 = not yet fixed by a dense layer
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerSpec& layer = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" +
                              std::string(to_string(layer.kind)) + ")";
    switch (layer.kind) {
      case LayerKind::kDense: {
        if (layer.in_dim == 0 || layer.out_dim == 0) {
          throw ConstructionError(where + ": dimensions must be positive");
        }
        if (width != 0 && layer.in_dim != width) {
          throw ConstructionError(where + ": expects " + std::to_string(layer.in_dim) +
                                  " inputs but previous dense layer produces " +
                                  std::to_string(width));
        }
        if (layer.weights.empty()) {
          const double limit =
              std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
          Engine engine = make_engine(derive_seed(derive_seed(seed, kInitStream), i));
          std::uniform_real_distribution<double> init(-limit, limit);
          layer.weights = Matrix(layer.out_dim, layer.in_dim);
          for (double& w : layer.weights.values()) w = init(engine);
          layer.biases.assign(layer.out_dim, 0.0);
        } else if (layer.weights.rows() != layer.out_dim || layer.weights.cols() != layer.in_dim ||
                   layer.biases.size() != layer.out_dim) {
          throw ConstructionError(where + ": parameter shapes do not match declared dimensions");
        }
        width = layer.out_dim;
        break;
      }
      case LayerKind::kDropout:
        if (!(layer.rate >= 0.0 && layer.rate < 1.0)) {
          throw ConstructionError(where + ": rate must be in [0, 1), got " +
                                  std::to_string(layer.rate));
        }
        break;
      case LayerKind::kRelu:
      case LayerKind::kSoftmax:
        break;
      default:
        throw ConstructionError(where + ": unknown layer kind");
    }
  }
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kSoftmax: return "softmax";
    case LayerKind::kDropout: return "dropout";
  }
  return "unknown";
}

LayerSpec LayerSpec::dense(std::size_t in_dim, std::size_t out_dim) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in_dim = in_dim;
  s.out_dim = out_dim;
  return s;
}

LayerSpec LayerSpec::dense(Matrix weights, std::vector<double> biases) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.in_dim = weights.cols();
  s.out_dim = weights.rows();
  s.weights = std::move(weights);
  s.biases = std::move(biases);
  return s;
}

LayerSpec LayerSpec::relu() {
  LayerSpec s;
  s.kind = LayerKind::kRelu;
  return s;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec s;
  s.kind = LayerKind::kSoftmax;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::kDropout;
  s.rate = rate;
  return s;
}

SequentialModel::SequentialModel(std::vector<LayerSpec> layers, std::uint64_t seed,
                                 bool stochastic)
    : layers_(std::move(layers)), seed_(seed), stochastic_(stochastic) {}

void SequentialModel::set_parameters(std::size_t i, Matrix weights, std::vector<double> biases) {
  LayerSpec& layer = layers_.at(i);
  if (layer.kind != LayerKind::kDense) {
    throw ShapeError("layer " + std::to_string(i) + " has no parameters");
  }
  if (weights.rows() != layer.out_dim || weights.cols() != layer.in_dim ||
      biases.size() != layer.out_dim) {
    throw ShapeError("parameter shapes do not match layer " + std::to_string(i));
  }
  layer.weights = std::move(weights);
  layer.biases = std::move(biases);
}

ProblemType SequentialModel::problem_type() const {
  return layers_.back().kind == LayerKind::kSoftmax ? ProblemType::kClassification
                                                    : ProblemType::kRegression;
}

std::size_t SequentialModel::input_dim() const {
  for (const auto& l : layers_) {
    if (l.kind == LayerKind::kDense) return l.in_dim;
  }
  return 0;
}

bool SequentialModel::has_randomized_layers() const {
  return std::ranges::any_of(layers_, [](const LayerSpec& l) { return l.kind == LayerKind::kDropout; });
}

Matrix SequentialModel::forward(const Matrix& inputs) {
  internal::check_input_width(layers_, inputs);
  if (stochastic_ && stochastic_mode_ && has_randomized_layers()) {
    Engine engine = make_engine(derive_seed(derive_seed(seed_, kDropoutStream), dropout_calls_++));
    return std::move(internal::forward_trace(layers_, inputs, &engine).outputs.back());
  }
  return std::move(internal::forward_trace(layers_, inputs, nullptr).outputs.back());
}

SequentialModel build_sequential(std::vector<LayerSpec> layers, std::uint64_t seed) {
  validate_layers(layers, seed);
  return SequentialModel(std::move(layers), seed, /*stochastic=*/true);
}

SequentialModel build_plain_sequential(std::vector<LayerSpec> layers, std::uint64_t seed) {
  validate_layers(layers, seed);
  return SequentialModel(std::move(layers), seed, /*stochastic=*/false);
}

StochasticConversion stochastic_from_plain(const SequentialModel& plain) {
  SequentialModel converted(plain.layers_, plain.seed_, /*stochastic=*/true);
  const bool degenerate = !converted.has_randomized_layers();
  return StochasticConversion{std::move(converted), degenerate};
}

namespace internal {

void check_input_width(std::span<const LayerSpec> layers, const Matrix& x) {
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kDense) {
      if (x.cols() != l.in_dim) {
        throw ShapeError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(l.in_dim));
      }
      return;
    }
  }
}

Matrix dense_forward(const LayerSpec& layer, const Matrix& x) {
  Matrix out(x.rows(), layer.out_dim);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto in = x.row(b);
    auto o = out.row(b);
    for (std::size_t j = 0; j < layer.out_dim; ++j) {
      const auto w = layer.weights.row(j);
      double acc = layer.biases[j];
      for (std::size_t i = 0; i < layer.in_dim; ++i) acc += w[i] * in[i];
      o[j] = acc;
    }
  }
  return out;
}

Matrix relu_forward(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix softmax_forward(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto in = x.row(b);
    auto o = out.row(b);
    const double peak = *std::ranges::max_element(in);
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - peak);
      total += o[c];
    }
    for (double& v : o) v /= total;
  }
  return out;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Engine& engine) {
  Matrix mask(rows, cols, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& m : mask.values()) m = u(engine) < rate ? 0.0 : keep_scale;
  return mask;
}

Trace forward_trace(std::span<const LayerSpec> layers, const Matrix& x, Engine* dropout_engine) {
  Trace trace;
  trace.outputs.reserve(layers.size());
  trace.masks.resize(layers.size());
  const Matrix* current = &x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    switch (layer.kind) {
      case LayerKind::kDense:
        trace.outputs.push_back(dense_forward(layer, *current));
        break;
      case LayerKind::kRelu:
        trace.outputs.push_back(relu_forward(*current));
        break;
      case LayerKind::kSoftmax:
        trace.outputs.push_back(softmax_forward(*current));
        break;
      case LayerKind::kDropout: {
        Matrix out = *current;
        if (dropout_engine != nullptr) {
          trace.masks[i] = dropout_mask(out.rows(), out.cols(), layer.rate, *dropout_engine);
          const auto mask = trace.masks[i].values();
          auto values = out.values();
          for (std::size_t k = 0; k < values.size(); ++k) values[k] *= mask[k];
        }
        trace.outputs.push_back(std::move(out));
        break;
      }
    }
    current = &trace.outputs.back();
  }
  return trace;
}

}  // namespace internal
}  // namespace uqwiz
