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

#include "uqwiz/errors.h"
#include "uqwiz/nn.h"

namespace uqwiz {
namespace {

void check_applicable(const SequentialModel& model, const QuantifierDescriptor& q) {
  if (q.problem_type != model.problem_type()) {
    throw UnsupportedQuantifierError("quantifier '" + q.canonical_name + "' is for " +
                                     std::string(to_string(q.problem_type)) +
                                     " but the model is a " +
                                     std::string(to_string(model.problem_type())) + " model");
  }
}

// Streams `x` (each row repeated `repeats` times) through the model and
// writes the outputs into an (N, repeats, width) tensor.
Tensor3 collect_outputs(SequentialModel& model, const Matrix& x, std::size_t repeats,
                        std::size_t batch_size) {
  ReplicatedBatches stream(x, repeats, batch_size);
  Tensor3 out;
  Matrix batch;
  while (stream.next(batch)) {
    const Matrix y = model.forward(batch);
    if (out.inputs() == 0) out = Tensor3(x.rows(), repeats, y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const std::size_t row = stream.chunk_start() + r;
      std::ranges::copy(y.row(r), out.sample(row / repeats, row % repeats).begin());
    }
  }
  return out;
}

Matrix single_pass(SequentialModel& model, const Matrix& x, std::size_t batch_size) {
  const Tensor3 t = collect_outputs(model, x, 1, batch_size);
  Matrix m(t.inputs(), t.width());
  std::ranges::copy(t.values(), m.values().begin());
  return m;
}

}  // namespace

ReplicatedBatches::ReplicatedBatches(const Matrix& inputs, std::size_t repeats,
                                     std::size_t batch_size)
    : inputs_(inputs), repeats_(repeats), batch_size_(batch_size) {
  if (repeats_ == 0) throw ValidationError("repeat count must be positive");
  if (batch_size_ == 0) throw ValidationError("batch size must be positive");
}

bool ReplicatedBatches::next(Matrix& batch) {
  if (position_ >= total_rows()) return false;
  const std::size_t rows = std::min(batch_size_, total_rows() - position_);
  batch = Matrix(rows, inputs_.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    std::ranges::copy(inputs_.row((position_ + r) / repeats_), batch.row(r).begin());
  }
  chunk_start_ = position_;
  position_ += rows;
  peak_rows_ = std::max(peak_rows_, rows);
  return true;
}

std::vector<const QuantifierDescriptor*> resolve_quantifiers(
    const std::vector<std::string>& aliases) {
  std::vector<const QuantifierDescriptor*> out;
  out.reserve(aliases.size());
  for (const auto& a : aliases) out.push_back(&lookup_quantifier(a));
  return out;
}

std::vector<QuantifiedResult> predict_quantified(
    SequentialModel& model, const Matrix& x,
    std::span<const QuantifierDescriptor* const> quantifiers, const PredictOptions& options) {
  StochasticModeScope reset(model, false);
  if (quantifiers.empty()) throw ValidationError("no quantifier requested");
  bool any_point = false;
  bool any_sampled = false;
  for (const auto* q : quantifiers) {
    check_applicable(model, *q);
    (q->is_sampling_based ? any_sampled : any_point) = true;
  }
  if (any_sampled && options.num_samples < 2) {
    throw InsufficientSamplesError("sampling-based quantifiers need num_samples >= 2, got " +
                                   std::to_string(options.num_samples));
  }
  if (x.rows() == 0) throw ValidationError("no inputs to predict");

  Matrix single;
  if (any_point) single = single_pass(model, x, options.batch_size);

  Tensor3 sampled;
  if (any_sampled) {
    model.set_stochastic_mode(true);
    sampled = collect_outputs(model, x, options.num_samples, options.batch_size);
    model.set_stochastic_mode(false);
  }

  std::vector<QuantifiedResult> results;
  results.reserve(quantifiers.size());
  for (const auto* q : quantifiers) {
    QuantifiedResult r = q->is_sampling_based ? q->sampled(sampled) : q->point(single);
    results.push_back(convert_score(std::move(r), options.as_confidence));
  }
  return results;
}

std::vector<QuantifiedResult> predict_quantified(SequentialModel& model, const Matrix& x,
                                                 const std::vector<std::string>& aliases,
                                                 const PredictOptions& options) {
  const auto resolved = resolve_quantifiers(aliases);
  return predict_quantified(model, x, std::span<const QuantifierDescriptor* const>(resolved),
                            options);
}

std::vector<QuantifiedResult> predict_quantified(SequentialModel& model, const Matrix& x,
                                                 std::initializer_list<std::string_view> aliases,
                                                 const PredictOptions& options) {
  return predict_quantified(model, x, std::vector<std::string>(aliases.begin(), aliases.end()),
                            options);
}

QuantifiedResult predict_quantified(SequentialModel& model, const Matrix& x,
                                    const QuantifierDescriptor& quantifier,
                                    const PredictOptions& options) {
  const QuantifierDescriptor* one[] = {&quantifier};
  return std::move(predict_quantified(model, x, one, options).front());
}

QuantifiedResult predict_quantified(SequentialModel& model, const Matrix& x,
                                    std::string_view alias, const PredictOptions& options) {
  return predict_quantified(model, x, lookup_quantifier(alias), options);
}

}  // namespace uqwiz
