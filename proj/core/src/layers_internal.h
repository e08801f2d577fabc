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

// Layer kernels shared by prediction and training. Not installed.

#ifndef UQWIZ_SRC_LAYERS_INTERNAL_H_
#define UQWIZ_SRC_LAYERS_INTERNAL_H_

#include <span>
#include <vector>

#include "uqwiz/array.h"
#include "uqwiz/nn.h"
#include "uqwiz/random.h"

namespace uqwiz::internal {

Matrix dense_forward(const LayerSpec& layer, const Matrix& x);
Matrix relu_forward(const Matrix& x);
Matrix softmax_forward(const Matrix& x);

// Inverted-dropout mask: 0 with probability `rate`, 1 / (1 - rate) otherwise.
Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Engine& engine);

// Activations of a forward pass. outputs[i] is the output of layer i;
// masks[i] is non-empty for dropout layers that were active.
struct Trace {
  std::vector<Matrix> outputs;
  std::vector<Matrix> masks;
};

// `dropout_engine` == nullptr disables every dropout layer.
Trace forward_trace(std::span<const LayerSpec> layers, const Matrix& x, Engine* dropout_engine);

void check_input_width(std::span<const LayerSpec> layers, const Matrix& x);

}  // namespace uqwiz::internal

#endif  // UQWIZ_SRC_LAYERS_INTERNAL_H_
