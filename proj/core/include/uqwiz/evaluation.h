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

#ifndef UQWIZ_EVALUATION_H_
#define UQWIZ_EVALUATION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "uqwiz/quantifiers.h"

namespace uqwiz {

// Area under the ROC curve of `scores` as a detector of `positive`, via the
// Mann-Whitney rank statistic with midranks for ties. Empty when either
// class is absent.
std::optional<double> auroc(std::span<const double> scores, const std::vector<bool>& positive);

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels);

struct MispredictionReport {
  double accuracy = 0.0;
  // How well the score ranks wrong predictions above correct ones.
  std::optional<double> auroc;
  std::size_t num_wrong = 0;
};

// Scores are oriented as uncertainties first (confidences negated), so a
// higher score means more likely wrong.
MispredictionReport evaluate_misprediction(const QuantifiedResult& result,
                                           std::span<const std::size_t> labels);

}  // namespace uqwiz

#endif  // UQWIZ_EVALUATION_H_
