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

#ifndef UQWIZ_NN_H_
#define UQWIZ_NN_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "uqwiz/array.h"
#include "uqwiz/quantifiers.h"
#include "uqwiz/random.h"

namespace uqwiz {

// On-disk tags of the model file format; do not renumber.
enum class LayerKind : std::uint8_t { kDense = 0, kRelu = 1, kSoftmax = 2, kDropout = 3 };

std::string_view to_string(LayerKind kind);

// One layer of a sequential network. Dense layers carry `weights`
// (out_dim x in_dim, row-major) and `biases` (out_dim); a dense layer created
// with dense(in, out) has empty weights and is initialized by the model
// builder.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Matrix weights;
  std::vector<double> biases;
  double rate = 0.0;

  static LayerSpec dense(std::size_t in_dim, std::size_t out_dim);
  static LayerSpec dense(Matrix weights, std::vector<double> biases);
  static LayerSpec relu();
  static LayerSpec softmax();
  static LayerSpec dropout(double rate);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Feed-forward stack of dense / relu / softmax / dropout layers.
//
// Every model owns a Stochastic Mode flag. Dropout layers of a stochastic
// model are active while training or while the flag is set; dropout layers
// of a plain model are active only while training. The flag is per instance,
// there is no process-wide learning phase.
//
// A model is not thread-safe: the flag and the dropout call counter are
// mutable state. Distinct instances are independent.
class SequentialModel {
 public:
  std::span<const LayerSpec> layers() const { return layers_; }
  const LayerSpec& layer(std::size_t i) const { return layers_.at(i); }
  std::size_t num_layers() const { return layers_.size(); }

  // Replaces the parameters of dense layer `i`; shapes must match.
  void set_parameters(std::size_t i, Matrix weights, std::vector<double> biases);

  std::uint64_t seed() const { return seed_; }
  // Classification iff the last layer is a softmax.
  ProblemType problem_type() const;
  // 0 when the model has no dense layer (any input width accepted).
  std::size_t input_dim() const;

  bool is_stochastic() const { return stochastic_; }
  bool has_randomized_layers() const;

  bool stochastic_mode() const { return stochastic_mode_; }
  void set_stochastic_mode(bool enabled) { stochastic_mode_ = enabled; }

  // Prediction-time forward pass. Dropout follows the rules above, using
  // inverted scaling. Each pass with active dropout draws its masks from the
  // stream (seed, call counter), so sampled runs replay given the same model
  // and call order.
  Matrix forward(const Matrix& inputs);

  friend bool operator==(const SequentialModel& a, const SequentialModel& b) {
    return a.layers_ == b.layers_ && a.seed_ == b.seed_ && a.stochastic_ == b.stochastic_;
  }

 private:
  friend SequentialModel build_sequential(std::vector<LayerSpec>, std::uint64_t);
  friend SequentialModel build_plain_sequential(std::vector<LayerSpec>, std::uint64_t);
  friend struct StochasticConversion stochastic_from_plain(const SequentialModel&);
  friend class Trainer;

  SequentialModel(std::vector<LayerSpec> layers, std::uint64_t seed, bool stochastic);

  std::vector<LayerSpec> layers_;
  std::uint64_t seed_ = 0;
  bool stochastic_ = true;
  bool stochastic_mode_ = false;
  std::uint64_t dropout_calls_ = 0;
};

// Builds a stochastic model. Dense specs without weights get Glorot-uniform
// weights drawn from `seed`; biases start at zero. Throws ConstructionError
// naming the offending layer on dimension mismatch or invalid dropout rate.
SequentialModel build_sequential(std::vector<LayerSpec> layers, std::uint64_t seed);

// Same as build_sequential, but dropout is inert at prediction time, like a
// model from a framework without a stochastic mode.
SequentialModel build_plain_sequential(std::vector<LayerSpec> layers, std::uint64_t seed);

struct StochasticConversion {
  SequentialModel model;
  // Set when the source had no randomized layer; sampling-based quantifiers
  // on such a model see identical samples.
  bool no_randomized_layers = false;
};

// Rebinds every dropout layer of `plain` to the returned model's stochastic
// mode. Weights are copied unchanged.
StochasticConversion stochastic_from_plain(const SequentialModel& plain);

// Sets the stochastic mode for a scope and resets it to false on exit,
// including exits by exception.
class StochasticModeScope {
 public:
  StochasticModeScope(SequentialModel& model, bool enabled) : model_(model) {
    model_.set_stochastic_mode(enabled);
  }
  ~StochasticModeScope() { model_.set_stochastic_mode(false); }
  StochasticModeScope(const StochasticModeScope&) = delete;
  StochasticModeScope& operator=(const StochasticModeScope&) = delete;

 private:
  SequentialModel& model_;
};

// ---- training ----

enum class Loss { kCrossEntropy, kMeanSquaredError };

std::string_view to_string(Loss loss);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  Loss loss = Loss::kCrossEntropy;
  std::uint64_t seed = 0;
};

struct TrainingHistory {
  // Mean training loss of each epoch.
  std::vector<double> loss;

  friend bool operator==(const TrainingHistory&, const TrainingHistory&) = default;
};

void to_json(nlohmann::json& j, const TrainingHistory& h);
void from_json(const nlohmann::json& j, TrainingHistory& h);

// Class labels for classification, N x D targets for regression.
using Targets = std::variant<std::vector<std::size_t>, Matrix>;

// Minibatch SGD with per-epoch shuffling. Dropout is active during training
// regardless of the stochastic mode. Throws TrainingError when the loss
// becomes non-finite.
TrainingHistory fit(SequentialModel& model, const Matrix& x, const Targets& y,
                    const TrainConfig& config);

// Gradient of the mean loss over `x` for every layer; entries of non-dense
// layers are empty. Dropout is not applied.
struct LayerGradient {
  Matrix weights;
  std::vector<double> biases;
};

struct LossGradients {
  double loss = 0.0;
  std::vector<LayerGradient> layers;
};

LossGradients compute_gradients(const SequentialModel& model, const Matrix& x, const Targets& y,
                                Loss loss);

// Mean loss without dropout.
double evaluate_loss(const SequentialModel& model, const Matrix& x, const Targets& y, Loss loss);

// ---- quantified prediction ----

struct PredictOptions {
  std::size_t num_samples = 32;
  std::optional<bool> as_confidence;
  std::size_t batch_size = 32;
};

// Streams the virtual input sequence in which every row of `inputs` is
// repeated `repeats` times consecutively, without materializing more than
// `batch_size` rows at once. Row r of the stream is input r / repeats.
class ReplicatedBatches {
 public:
  ReplicatedBatches(const Matrix& inputs, std::size_t repeats, std::size_t batch_size);

  // Fills `batch` with the next chunk; false once the stream is exhausted.
  bool next(Matrix& batch);

  std::size_t total_rows() const { return inputs_.rows() * repeats_; }
  // Stream index of the first row of the last chunk returned.
  std::size_t chunk_start() const { return chunk_start_; }
  std::size_t peak_rows() const { return peak_rows_; }

 private:
  const Matrix& inputs_;
  std::size_t repeats_;
  std::size_t batch_size_;
  std::size_t position_ = 0;
  std::size_t chunk_start_ = 0;
  std::size_t peak_rows_ = 0;
};

// Runs one deterministic pass for point-predictor quantifiers and one
// sampled pass (stochastic mode on, each input replicated num_samples times)
// for sampling-based ones, then applies each quantifier and convert_score.
// Results are returned in request order. The stochastic mode is false on
// return, also when an exception escapes.
std::vector<QuantifiedResult> predict_quantified(
    SequentialModel& model, const Matrix& x,
    std::span<const QuantifierDescriptor* const> quantifiers, const PredictOptions& options = {});

std::vector<QuantifiedResult> predict_quantified(SequentialModel& model, const Matrix& x,
                                                 const std::vector<std::string>& aliases,
                                                 const PredictOptions& options = {});

std::vector<QuantifiedResult> predict_quantified(SequentialModel& model, const Matrix& x,
                                                 std::initializer_list<std::string_view> aliases,
                                                 const PredictOptions& options = {});

QuantifiedResult predict_quantified(SequentialModel& model, const Matrix& x,
                                    const QuantifierDescriptor& quantifier,
                                    const PredictOptions& options = {});

QuantifiedResult predict_quantified(SequentialModel& model, const Matrix& x,
                                    std::string_view alias, const PredictOptions& options = {});

// Resolves aliases in order; throws UnknownQuantifierError.
std::vector<const QuantifierDescriptor*> resolve_quantifiers(
    const std::vector<std::string>& aliases);

}  // namespace uqwiz

#endif  // UQWIZ_NN_H_
