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

#include "uqwiz/quantifiers.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "uqwiz/errors.h"

namespace uqwiz {
namespace {

constexpr double kSumTolerance = 1e-6;
constexpr double kRangeSlack = 1e-12;

// Entries within this distance of the maximum count as tied, so analytic
// ties that floating point resolves by an ulp still go to the lowest index.
constexpr double kTieTolerance = 1e-12;

std::size_t argmax(std::span<const double> row) {
  const double peak = *std::ranges::max_element(row);
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] >= peak - kTieTolerance) return c;
  }
  return 0;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

void check_distribution(std::span<const double> row, const std::string& where) {
  double sum = 0.0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    const double v = row[c];
    if (!(v >= -kRangeSlack && v <= 1.0 + kRangeSlack)) {
      std::ostringstream os;
      os << where << ": entry " << c << " = " << v << " is outside [0, 1]";
      throw ValidationError(os.str());
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os << where << ": sums to " << sum << ", expected 1";
    throw ValidationError(os.str());
  }
}

void validate_single(const Matrix& outputs) {
  if (outputs.rows() == 0) throw ValidationError("quantifier needs at least one input");
  if (outputs.cols() < 2) {
    throw ShapeError("classification quantifiers need at least 2 classes, got " +
                     std::to_string(outputs.cols()));
  }
  for (std::size_t n = 0; n < outputs.rows(); ++n) {
    check_distribution(outputs.row(n), "row " + std::to_string(n));
  }
}

void validate_sampled(const Tensor3& samples, std::size_t min_samples) {
  if (samples.inputs() == 0) throw ValidationError("quantifier needs at least one input");
  if (samples.samples() < min_samples) {
    throw InsufficientSamplesError("quantifier needs at least " + std::to_string(min_samples) +
                                   " samples per input, got " +
                                   std::to_string(samples.samples()));
  }
  if (samples.width() < 2) {
    throw ShapeError("classification quantifiers need at least 2 classes, got " +
                     std::to_string(samples.width()));
  }
  for (std::size_t n = 0; n < samples.inputs(); ++n) {
    for (std::size_t s = 0; s < samples.samples(); ++s) {
      check_distribution(samples.sample(n, s),
                         "input " + std::to_string(n) + " sample " + std::to_string(s));
    }
  }
}

// Running mean; exact when all samples are equal, so S identical samples
// reproduce the single-sample values bit for bit.
std::vector<double> mean_distribution(const Tensor3& samples, std::size_t n) {
  std::vector<double> mean(samples.width(), 0.0);
  for (std::size_t s = 0; s < samples.samples(); ++s) {
    const auto row = samples.sample(n, s);
    const double k = static_cast<double>(s + 1);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += (row[c] - mean[c]) / k;
  }
  return mean;
}

QuantifiedResult classification_result(std::size_t n, ScoreKind kind) {
  QuantifiedResult r;
  r.problem_type = ProblemType::kClassification;
  r.score_kind = kind;
  r.classes.reserve(n);
  r.scores.reserve(n);
  return r;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::ranges::transform(out, out.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

QuantifierDescriptor point_quantifier(std::string name, std::vector<std::string> aliases,
                                      QuantifiedResult (*fn)(const Matrix&)) {
  QuantifierDescriptor d;
  d.canonical_name = std::move(name);
  d.aliases = std::move(aliases);
  d.is_sampling_based = false;
  d.native_kind = ScoreKind::kConfidence;
  d.min_samples = 1;
  d.point = fn;
  return d;
}

QuantifierDescriptor sampled_quantifier(std::string name, std::vector<std::string> aliases,
                                        ScoreKind kind, std::size_t min_samples,
                                        QuantifiedResult (*fn)(const Tensor3&),
                                        ProblemType type = ProblemType::kClassification) {
  QuantifierDescriptor d;
  d.canonical_name = std::move(name);
  d.aliases = std::move(aliases);
  d.is_sampling_based = true;
  d.native_kind = kind;
  d.problem_type = type;
  d.min_samples = min_samples;
  d.sampled = fn;
  return d;
}

}  // namespace

std::string_view to_string(ScoreKind kind) {
  return kind == ScoreKind::kConfidence ? "confidence" : "uncertainty";
}

std::string_view to_string(ProblemType type) {
  return type == ProblemType::kClassification ? "classification" : "regression";
}

QuantifiedResult max_softmax(const Matrix& outputs) {
  validate_single(outputs);
  auto r = classification_result(outputs.rows(), ScoreKind::kConfidence);
  for (std::size_t n = 0; n < outputs.rows(); ++n) {
    const auto row = outputs.row(n);
    const std::size_t best = argmax(row);
    r.classes.push_back(best);
    r.scores.push_back(row[best]);
  }
  return r;
}

QuantifiedResult prediction_confidence_score(const Matrix& outputs) {
  validate_single(outputs);
  auto r = classification_result(outputs.rows(), ScoreKind::kConfidence);
  for (std::size_t n = 0; n < outputs.rows(); ++n) {
    const auto row = outputs.row(n);
    const std::size_t best = argmax(row);
    double second = -1.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != best) second = std::max(second, row[c]);
    }
    r.classes.push_back(best);
    r.scores.push_back(row[best] - second);
  }
  return r;
}

QuantifiedResult variation_ratio(const Tensor3& samples) {
  validate_sampled(samples, 2);
  auto r = classification_result(samples.inputs(), ScoreKind::kUncertainty);
  std::vector<std::size_t> votes(samples.width());
  for (std::size_t n = 0; n < samples.inputs(); ++n) {
    std::ranges::fill(votes, 0);
    for (std::size_t s = 0; s < samples.samples(); ++s) ++votes[argmax(samples.sample(n, s))];
    const auto mode = static_cast<std::size_t>(std::ranges::max_element(votes) - votes.begin());
    r.classes.push_back(mode);
    r.scores.push_back(1.0 - static_cast<double>(votes[mode]) /
                                 static_cast<double>(samples.samples()));
  }
  return r;
}

QuantifiedResult predictive_entropy(const Tensor3& samples) {
  validate_sampled(samples, 2);
  auto r = classification_result(samples.inputs(), ScoreKind::kUncertainty);
  for (std::size_t n = 0; n < samples.inputs(); ++n) {
    const auto mean = mean_distribution(samples, n);
    r.classes.push_back(argmax(mean));
    r.scores.push_back(entropy(mean));
  }
  return r;
}

QuantifiedResult mutual_information(const Tensor3& samples) {
  validate_sampled(samples, 2);
  auto r = classification_result(samples.inputs(), ScoreKind::kUncertainty);
  for (std::size_t n = 0; n < samples.inputs(); ++n) {
    const auto mean = mean_distribution(samples, n);
    double expected_entropy = 0.0;
    for (std::size_t s = 0; s < samples.samples(); ++s) {
      expected_entropy += entropy(samples.sample(n, s));
    }
    expected_entropy /= static_cast<double>(samples.samples());
    r.classes.push_back(argmax(mean));
    r.scores.push_back(std::max(0.0, entropy(mean) - expected_entropy));
  }
  return r;
}

QuantifiedResult mean_softmax(const Tensor3& samples) {
  validate_sampled(samples, 1);
  auto r = classification_result(samples.inputs(), ScoreKind::kConfidence);
  for (std::size_t n = 0; n < samples.inputs(); ++n) {
    const auto mean = mean_distribution(samples, n);
    const std::size_t best = argmax(mean);
    r.classes.push_back(best);
    r.scores.push_back(mean[best]);
  }
  return r;
}

QuantifiedResult standard_deviation(const Tensor3& samples) {
  if (samples.inputs() == 0) throw ValidationError("quantifier needs at least one input");
  if (samples.samples() < 2) {
    throw InsufficientSamplesError("standard deviation needs at least 2 samples per input, got " +
                                   std::to_string(samples.samples()));
  }
  if (samples.width() == 0) throw ShapeError("regression outputs need at least one dimension");
  for (double v : samples.values()) {
    if (!std::isfinite(v)) throw ValidationError("regression samples contain a non-finite value");
  }

  const std::size_t dims = samples.width();
  const double count = static_cast<double>(samples.samples());
  QuantifiedResult r;
  r.problem_type = ProblemType::kRegression;
  r.score_kind = ScoreKind::kUncertainty;
  r.values = Matrix(samples.inputs(), dims);
  r.scores.reserve(samples.inputs());
  for (std::size_t n = 0; n < samples.inputs(); ++n) {
    double std_sum = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      double mean = 0.0;
      for (std::size_t s = 0; s < samples.samples(); ++s) {
        mean += (samples(n, s, d) - mean) / static_cast<double>(s + 1);
      }
      double sq = 0.0;
      for (std::size_t s = 0; s < samples.samples(); ++s) {
        const double dev = samples(n, s, d) - mean;
        sq += dev * dev;
      }
      r.values(n, d) = mean;
      std_sum += std::sqrt(sq / count);
    }
    r.scores.push_back(std_sum / static_cast<double>(dims));
  }
  return r;
}

QuantifiedResult convert_score(QuantifiedResult result, std::optional<bool> as_confidence) {
  if (!as_confidence) return result;
  const ScoreKind wanted = *as_confidence ? ScoreKind::kConfidence : ScoreKind::kUncertainty;
  if (wanted == result.score_kind) return result;
  // 0.0 - s rather than -s, so a zero score does not turn into -0.0.
  for (double& s : result.scores) s = 0.0 - s;
  result.score_kind = wanted;
  return result;
}

std::span<const QuantifierDescriptor> builtin_quantifiers() {
  static const std::vector<QuantifierDescriptor> registry = {
      point_quantifier("max_softmax", {"max_softmax", "softmax", "sm"}, &max_softmax),
      point_quantifier("prediction_confidence_score", {"pcs"}, &prediction_confidence_score),
      sampled_quantifier("variation_ratio", {"var_ratio", "variation_ratio", "vr"},
                         ScoreKind::kUncertainty, 2, &variation_ratio),
      sampled_quantifier("predictive_entropy", {"pred_entropy", "predictive_entropy", "pe"},
                         ScoreKind::kUncertainty, 2, &predictive_entropy),
      sampled_quantifier("mutual_information", {"mutu_info", "mutual_information", "mi"},
                         ScoreKind::kUncertainty, 2, &mutual_information),
      sampled_quantifier("mean_softmax", {"mean_softmax", "ensembling", "ms"},
                         ScoreKind::kConfidence, 1, &mean_softmax),
      sampled_quantifier("standard_deviation", {"std", "stddev", "standard_deviation"},
                         ScoreKind::kUncertainty, 2, &standard_deviation,
                         ProblemType::kRegression),
  };
  return registry;
}

const QuantifierDescriptor& lookup_quantifier(std::string_view alias) {
  const std::string key = lower(alias);
  for (const auto& d : builtin_quantifiers()) {
    for (const auto& a : d.aliases) {
      if (a == key) return d;
    }
  }
  std::ostringstream os;
  os << "unknown quantifier '" << alias << "'; known aliases:";
  for (const auto& a : known_aliases()) os << ' ' << a;
  throw UnknownQuantifierError(os.str());
}

std::vector<std::string> known_aliases() {
  std::vector<std::string> out;
  for (const auto& d : builtin_quantifiers()) out.insert(out.end(), d.aliases.begin(), d.aliases.end());
  return out;
}

}  // namespace uqwiz
