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

#ifndef UQWIZ_QUANTIFIERS_H_
#define UQWIZ_QUANTIFIERS_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqwiz/array.h"

namespace uqwiz {

enum class ScoreKind { kConfidence, kUncertainty };
enum class ProblemType { kClassification, kRegression };

std::string_view to_string(ScoreKind kind);
std::string_view to_string(ProblemType type);

// Final predictions plus one score per input. Classification results fill
// `classes`; regression results fill `values` (N x D).
struct QuantifiedResult {
  ProblemType problem_type = ProblemType::kClassification;
  std::vector<std::size_t> classes;
  Matrix values;
  std::vector<double> scores;
  ScoreKind score_kind = ScoreKind::kConfidence;

  std::size_t size() const { return scores.size(); }

  friend bool operator==(const QuantifiedResult&, const QuantifiedResult&) = default;
};

// Point-predictor quantifiers: one deterministic softmax row per input.
QuantifiedResult max_softmax(const Matrix& outputs);
QuantifiedResult prediction_confidence_score(const Matrix& outputs);

// Sampling-based quantifiers over (inputs x samples x classes) softmax
// outputs. Entropies use the natural logarithm with 0 ln 0 = 0; every argmax
// resolves ties towards the lowest class index.
QuantifiedResult variation_ratio(const Tensor3& samples);
QuantifiedResult predictive_entropy(const Tensor3& samples);
// H(mean) - mean(H), clamped below at zero.
QuantifiedResult mutual_information(const Tensor3& samples);
// Accepts a single sample.
QuantifiedResult mean_softmax(const Tensor3& samples);

// Regression: per-dimension mean as prediction, mean over dimensions of the
// population standard deviation as uncertainty.
QuantifiedResult standard_deviation(const Tensor3& samples);

// Negates scores and flips the kind when `as_confidence` asks for the other
// kind. Unset means no conversion.
QuantifiedResult convert_score(QuantifiedResult result, std::optional<bool> as_confidence);

// A named quantifier. Exactly one of `point` / `sampled` is set, matching
// `is_sampling_based`. Users may build their own descriptors and pass them
// wherever a quantifier is accepted.
struct QuantifierDescriptor {
  std::string canonical_name;
  std::vector<std::string> aliases;
  bool is_sampling_based = false;
  ScoreKind native_kind = ScoreKind::kConfidence;
  ProblemType problem_type = ProblemType::kClassification;
  std::size_t min_samples = 2;
  std::function<QuantifiedResult(const Matrix&)> point;
  std::function<QuantifiedResult(const Tensor3&)> sampled;
};

// The seven built-ins, in a stable order: max_softmax, pcs, var_ratio,
// pred_entropy, mutu_info, mean_softmax, std.
std::span<const QuantifierDescriptor> builtin_quantifiers();

// Case-insensitive alias lookup. Throws UnknownQuantifierError listing every
// known alias.
const QuantifierDescriptor& lookup_quantifier(std::string_view alias);

std::vector<std::string> known_aliases();

}  // namespace uqwiz

#endif  // UQWIZ_QUANTIFIERS_H_
