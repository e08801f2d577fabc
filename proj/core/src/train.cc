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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "layers_internal.h"
#include "uqwiz/errors.h"
#include "uqwiz/nn.h"

namespace uqwiz {

// Friend of SequentialModel; owns the parameter update.
class Trainer {
 public:
  static std::vector<LayerSpec>& layers(SequentialModel& m) { return m.layers_; }
};

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kTrainDropoutStream = 2;

std::size_t target_rows(const Targets& y) {
  return std::visit(
      [](const auto& t) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) {
          return t.rows();
        } else {
          return t.size();
        }
      },
      y);
}

Targets select_targets(const Targets& y, std::span<const std::size_t> idx) {
  if (const auto* labels = std::get_if<std::vector<std::size_t>>(&y)) {
    std::vector<std::size_t> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back((*labels)[i]);
    return out;
  }
  return std::get<Matrix>(y).select_rows(idx);
}

// Loss of the final layer output and its gradient. For cross-entropy the
// gradient is taken with respect to the softmax input, and `first_layer` is
// set to the layer below the softmax.
double loss_head(std::span<const LayerSpec> layers, const Matrix& out, const Targets& y, Loss loss,
                 Matrix& grad, std::size_t& first_layer) {
  const std::size_t batch = out.rows();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  grad = Matrix(out.rows(), out.cols());
  const auto* labels = std::get_if<std::vector<std::size_t>>(&y);

  if (loss == Loss::kCrossEntropy) {
    if (layers.back().kind != LayerKind::kSoftmax) {
      throw ValidationError("cross-entropy loss needs a softmax output layer");
    }
    if (labels == nullptr) throw ValidationError("cross-entropy loss needs class labels");
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t label = (*labels)[b];
      total -= std::log(out(b, label));
      for (std::size_t c = 0; c < out.cols(); ++c) {
        grad(b, c) = (out(b, c) - (c == label ? 1.0 : 0.0)) * inv_batch;
      }
    }
    first_layer = layers.size() - 1;  // exclusive upper bound: skip the softmax
    return total * inv_batch;
  }

  const double inv_width = 1.0 / static_cast<double>(out.cols());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      const double target = labels != nullptr ? ((*labels)[b] == c ? 1.0 : 0.0)
                                              : std::get<Matrix>(y)(b, c);
      const double diff = out(b, c) - target;
      total += diff * diff * inv_width;
      grad(b, c) = 2.0 * diff * inv_width * inv_batch;
    }
  }
  first_layer = layers.size();
  return total * inv_batch;
}

LossGradients backward(std::span<const LayerSpec> layers, const internal::Trace& trace,
                       const Matrix& x, const Targets& y, Loss loss) {
  LossGradients result;
  result.layers.resize(layers.size());
  Matrix grad;
  std::size_t upper = 0;
  result.loss = loss_head(layers, trace.outputs.back(), y, loss, grad, upper);

  for (std::size_t i = upper; i-- > 0;) {
    const LayerSpec& layer = layers[i];
    const Matrix& input = i == 0 ? x : trace.outputs[i - 1];
    switch (layer.kind) {
      case LayerKind::kDense: {
        LayerGradient& g = result.layers[i];
        g.weights = Matrix(layer.out_dim, layer.in_dim);
        g.biases.assign(layer.out_dim, 0.0);
        Matrix next(grad.rows(), layer.in_dim);
        for (std::size_t b = 0; b < grad.rows(); ++b) {
          const auto in = input.row(b);
          const auto go = grad.row(b);
          auto gi = next.row(b);
          for (std::size_t j = 0; j < layer.out_dim; ++j) {
            const double gj = go[j];
            g.biases[j] += gj;
            auto gw = g.weights.row(j);
            const auto w = layer.weights.row(j);
            for (std::size_t k = 0; k < layer.in_dim; ++k) {
              gw[k] += gj * in[k];
              gi[k] += gj * w[k];
            }
          }
        }
        grad = std::move(next);
        break;
      }
      case LayerKind::kRelu: {
        const auto out = trace.outputs[i].values();
        auto g = grad.values();
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (!(out[k] > 0.0)) g[k] = 0.0;
        }
        break;
      }
      case LayerKind::kSoftmax: {
        const Matrix& p = trace.outputs[i];
        for (std::size_t b = 0; b < grad.rows(); ++b) {
          auto g = grad.row(b);
          const auto pb = p.row(b);
          double dot = 0.0;
          for (std::size_t c = 0; c < g.size(); ++c) dot += g[c] * pb[c];
          for (std::size_t c = 0; c < g.size(); ++c) g[c] = pb[c] * (g[c] - dot);
        }
        break;
      }
      case LayerKind::kDropout: {
        if (trace.masks[i].empty()) break;
        const auto mask = trace.masks[i].values();
        auto g = grad.values();
        for (std::size_t k = 0; k < g.size(); ++k) g[k] *= mask[k];
        break;
      }
    }
  }
  return result;
}

void validate_training_data(const SequentialModel& model, const Matrix& x, const Targets& y) {
  if (x.rows() == 0) throw ValidationError("training set is empty");
  if (target_rows(y) != x.rows()) {
    throw ShapeError("inputs have " + std::to_string(x.rows()) + " rows but targets have " +
                     std::to_string(target_rows(y)));
  }
  internal::check_input_width(model.layers(), x);
  Matrix probe(1, x.cols());
  std::ranges::copy(x.row(0), probe.row(0).begin());
  const std::size_t width = internal::forward_trace(model.layers(), probe, nullptr).outputs.back().cols();
  if (const auto* labels = std::get_if<std::vector<std::size_t>>(&y)) {
    for (std::size_t i = 0; i < labels->size(); ++i) {
      if ((*labels)[i] >= width) {
        throw ValidationError("label " + std::to_string((*labels)[i]) + " at row " +
                              std::to_string(i) + " is outside [0, " + std::to_string(width) + ")");
      }
    }
  } else if (std::get<Matrix>(y).cols() != width) {
    throw ShapeError("targets have " + std::to_string(std::get<Matrix>(y).cols()) +
                     " columns, model produces " + std::to_string(width));
  }
}

}  // namespace

std::string_view to_string(Loss loss) {
  return loss == Loss::kCrossEntropy ? "cross_entropy" : "mean_squared_error";
}

void to_json(nlohmann::json& j, const TrainingHistory& h) { j = nlohmann::json{{"loss", h.loss}}; }

void from_json(const nlohmann::json& j, TrainingHistory& h) {
  h.loss = j.at("loss").get<std::vector<double>>();
}

LossGradients compute_gradients(const SequentialModel& model, const Matrix& x, const Targets& y,
                                Loss loss) {
  validate_training_data(model, x, y);
  const auto trace = internal::forward_trace(model.layers(), x, nullptr);
  return backward(model.layers(), trace, x, y, loss);
}

double evaluate_loss(const SequentialModel& model, const Matrix& x, const Targets& y, Loss loss) {
  return compute_gradients(model, x, y, loss).loss;
}

TrainingHistory fit(SequentialModel& model, const Matrix& x, const Targets& y,
                    const TrainConfig& config) {
  validate_training_data(model, x, y);
  const std::size_t n = x.rows();
  if (config.batch_size == 0 || config.batch_size > n) {
    throw ValidationError("batch size must be in [1, " + std::to_string(n) + "], got " +
                          std::to_string(config.batch_size));
  }
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ValidationError("learning rate must be a non-negative finite number");
  }

  auto& layers = Trainer::layers(model);
  Engine shuffle_engine = make_engine(derive_seed(config.seed, kShuffleStream));
  Engine dropout_engine = make_engine(derive_seed(config.seed, kTrainDropoutStream));
  std::vector<std::size_t> order(n);

  TrainingHistory history;
  history.loss.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_engine);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = x.select_rows(idx);
      const Targets yb = select_targets(y, idx);
      const auto trace = internal::forward_trace(layers, xb, &dropout_engine);
      const auto grads = backward(layers, trace, xb, yb, config.loss);
      if (!std::isfinite(grads.loss)) {
        std::ostringstream os;
        os << "training aborted: loss became " << grads.loss << " at epoch " << epoch
           << ", batch starting at row " << start << " (try a smaller learning rate)";
        throw TrainingError(os.str());
      }
      for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].kind != LayerKind::kDense) continue;
        auto w = layers[i].weights.values();
        const auto gw = grads.layers[i].weights.values();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.learning_rate * gw[k];
        for (std::size_t k = 0; k < layers[i].biases.size(); ++k) {
          layers[i].biases[k] -= config.learning_rate * grads.layers[i].biases[k];
        }
      }
      epoch_loss += grads.loss * static_cast<double>(stop - start);
    }
    history.loss.push_back(epoch_loss / static_cast<double>(n));
  }
  return history;
}

}  // namespace uqwiz
