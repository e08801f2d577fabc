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

#include <gtest/gtest.h>

#include <random>

#include "uqwiz/errors.h"

namespace uqwiz {
namespace {

// Counts ordered (wrong, correct) pairs: a win is 1, a tie 1/2.
double pair_counting_auroc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc(std::vector{0.9, 0.8, 0.1, 0.2}, {true, true, false, false}), 1.0);
  EXPECT_EQ(auroc(std::vector{0.3, 0.3, 0.3, 0.3}, {true, false, true, false}), 0.5);
  EXPECT_EQ(auroc(std::vector{0.1, 0.9}, {true, false}), 0.0);
  EXPECT_FALSE(auroc(std::vector{0.1, 0.9}, {true, true}).has_value());
  EXPECT_FALSE(auroc(std::vector{0.1, 0.9}, {false, false}).has_value());
  EXPECT_THROW(auroc(std::vector{0.1}, {true, false}), ShapeError);
}

TEST(Auroc, MatchesPairCounting) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 6);  // coarse scores force ties
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 40;
    std::vector<double> scores(n);
    std::vector<bool> positive(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = level(rng) / 6.0;
      positive[i] = coin(rng);
    }
    positive[0] = true;
    positive[1] = false;
    EXPECT_NEAR(*auroc(scores, positive), pair_counting_auroc(scores, positive), 1e-12);
  }
}

TEST(Accuracy, CountsMatches) {
  const std::vector<std::size_t> predicted{0, 1, 2, 1};
  const std::vector<std::size_t> labels{0, 1, 1, 1};
  EXPECT_EQ(accuracy(predicted, labels), 0.75);
  EXPECT_THROW(accuracy(predicted, std::vector<std::size_t>{0}), ShapeError);
}

TEST(EvaluateMisprediction, OrientsConfidenceScores) {
  QuantifiedResult r;
  r.classes = {0, 1, 1, 0};
  r.scores = {0.9, 0.95, 0.2, 0.3};
  r.score_kind = ScoreKind::kConfidence;
  const std::vector<std::size_t> labels{0, 1, 0, 1};
  const auto report = evaluate_misprediction(r, labels);
  EXPECT_EQ(report.accuracy, 0.5);
  EXPECT_EQ(report.num_wrong, 2u);
  EXPECT_EQ(report.auroc, 1.0);

  const auto as_unc = evaluate_misprediction(convert_score(r, false), labels);
  EXPECT_EQ(as_unc.auroc, report.auroc);
}

TEST(EvaluateMisprediction, AllCorrectHasNoAuroc) {
  QuantifiedResult r;
  r.classes = {0, 1};
  r.scores = {0.1, 0.2};
  r.score_kind = ScoreKind::kUncertainty;
  const auto report = evaluate_misprediction(r, std::vector<std::size_t>{0, 1});
  EXPECT_EQ(report.accuracy, 1.0);
  EXPECT_FALSE(report.auroc.has_value());
}

}  // namespace
}  // namespace uqwiz
