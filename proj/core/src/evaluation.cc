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

#include "uqwiz/evaluation.h"

#include <algorithm>
#include <numeric>

#include "uqwiz/errors.h"

namespace uqwiz {

std::optional<double> auroc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw ShapeError("scores and labels differ in length");
  const std::size_t n = scores.size();
  const auto n_pos = static_cast<std::size_t>(std::ranges::count(positive, true));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their mean.
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) positive_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(n_neg));
}

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> labels) {
  if (predicted.size() != labels.size()) throw ShapeError("predictions and labels differ in length");
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

MispredictionReport evaluate_misprediction(const QuantifiedResult& result,
                                           std::span<const std::size_t> labels) {
  if (result.problem_type != ProblemType::kClassification) {
    throw UnsupportedQuantifierError("misprediction evaluation needs a classification result");
  }
  const auto oriented = convert_score(result, /*as_confidence=*/false);
  std::vector<bool> wrong(labels.size());
  if (result.classes.size() != labels.size()) throw ShapeError("predictions and labels differ in length");
  MispredictionReport report;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    wrong[i] = result.classes[i] != labels[i];
    report.num_wrong += wrong[i] ? 1 : 0;
  }
  report.accuracy = accuracy(result.classes, labels);
  report.auroc = auroc(oriented.scores, wrong);
  return report;
}

}  // namespace uqwiz
