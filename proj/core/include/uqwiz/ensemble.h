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

#ifndef UQWIZ_ENSEMBLE_H_
#define UQWIZ_ENSEMBLE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "uqwiz/array.h"
#include "uqwiz/context.h"
#include "uqwiz/nn.h"
#include "uqwiz/pool.h"
#include "uqwiz/quantifiers.h"

namespace uqwiz {

// Task signatures. Results must be convertible to and from nlohmann::json.
// Tasks execute in forked workers; they must not rely on state the calling
// process mutates after the pool run starts.
template <typename T>
using Supplier = std::function<std::pair<SequentialModel, T>(const TaskContext&)>;
// Mutates the model in place; the mutated model is persisted.
template <typename T>
using Mapper = std::function<T(SequentialModel&, const TaskContext&)>;
// Reads the model; nothing is persisted.
template <typename T>
using Consumer = std::function<T(SequentialModel&, const TaskContext&)>;

// A Deep Ensemble whose atomic models live in `path` as model_<i>.uwm. The
// handle never holds a model: every operation loads models inside pool
// tasks, one at a time per process.
//
// Layout: path/ensemble.json ({"version":1,"num_models":n,"base_seed":s}),
// path/model_<i>.uwm, and path/.uwlock while a pool run is active.
class LazyEnsemble {
 public:
  // Throws ValidationError unless num_models > 1. A null context picks
  // none/dynamic_growth by process count.
  LazyEnsemble(std::filesystem::path path, int num_models,
               std::shared_ptr<const ContextHandler> default_context = nullptr);

  // Opens an existing ensemble from its manifest.
  static LazyEnsemble open(const std::filesystem::path& path);

  // True when `path` is a directory containing a manifest.
  static bool is_ensemble_dir(const std::filesystem::path& path);

  const std::filesystem::path& path() const { return path_; }
  int num_models() const { return num_models_; }
  std::filesystem::path model_path(int model_id) const;
  std::filesystem::path manifest_path() const { return path_ / "ensemble.json"; }
  std::filesystem::path lock_path() const { return path_ / ".uwlock"; }

  // A copy of this handle using `context` for its pool runs.
  LazyEnsemble with_context(std::shared_ptr<const ContextHandler> context) const;

  // Calls `supplier` once per model id, persists each returned model and
  // writes the manifest. On failure, files of failed ids are removed and
  // TaskFailure lists them.
  template <typename T>
  std::vector<T> create(const Supplier<T>& supplier, const PoolConfig& pool = {},
                        PoolStats* stats = nullptr) const {
    return decode<T>(run(
        Operation::kCreate,
        [&supplier, this](const TaskContext& ctx) {
          const ModelLease lease(ctx);
          auto [model, value] = supplier(ctx);
          persist(model, ctx, Operation::kCreate);
          return nlohmann::json(std::move(value));
        },
        pool, stats));
  }

  // Loads each model, applies `mapper` and re-persists it. Models are
  // replaced only when every task succeeded.
  template <typename T>
  std::vector<T> modify(const Mapper<T>& mapper, const PoolConfig& pool = {},
                        PoolStats* stats = nullptr) const {
    return decode<T>(run(
        Operation::kModify,
        [&mapper, this](const TaskContext& ctx) {
          const ModelLease lease(ctx);
          auto model = load(ctx);
          nlohmann::json result = mapper(model, ctx);
          persist(model, ctx, Operation::kModify);
          return result;
        },
        pool, stats));
  }

  template <typename T>
  std::vector<T> consume(const Consumer<T>& consumer, const PoolConfig& pool = {},
                         PoolStats* stats = nullptr) const {
    return decode<T>(run(
        Operation::kConsume,
        [&consumer, this](const TaskContext& ctx) {
          const ModelLease lease(ctx);
          auto model = load(ctx);
          return nlohmann::json(consumer(model, ctx));
        },
        pool, stats));
  }

  // Each atomic model contributes forward(x) as one sample (sample axis
  // ordered by model id); the quantifiers are applied to the stack. Only
  // sampling-based quantifiers are accepted.
  std::vector<QuantifiedResult> predict_quantified(
      const Matrix& x, std::span<const QuantifierDescriptor* const> quantifiers,
      const PoolConfig& pool = {}, std::optional<bool> as_confidence = std::nullopt,
      PoolStats* stats = nullptr) const;
  std::vector<QuantifiedResult> predict_quantified(
      const Matrix& x, const std::vector<std::string>& aliases, const PoolConfig& pool = {},
      std::optional<bool> as_confidence = std::nullopt, PoolStats* stats = nullptr) const;
  QuantifiedResult predict_quantified(const Matrix& x, std::string_view alias,
                                      const PoolConfig& pool = {},
                                      std::optional<bool> as_confidence = std::nullopt,
                                      PoolStats* stats = nullptr) const;

  // Like predict_quantified, with outputs produced by a user consumer (which
  // typically loads its own inputs). Outputs must have identical shapes.
  std::vector<QuantifiedResult> quantify_predictions(
      std::span<const QuantifierDescriptor* const> quantifiers, const Consumer<Matrix>& consumer,
      const PoolConfig& pool = {}, std::optional<bool> as_confidence = std::nullopt,
      PoolStats* stats = nullptr) const;
  std::vector<QuantifiedResult> quantify_predictions(
      const std::vector<std::string>& aliases, const Consumer<Matrix>& consumer,
      const PoolConfig& pool = {}, std::optional<bool> as_confidence = std::nullopt,
      PoolStats* stats = nullptr) const;

 private:
  enum class Operation { kCreate, kModify, kConsume };

  std::vector<std::optional<nlohmann::json>> run(Operation op, const PoolTask& task,
                                                 const PoolConfig& pool, PoolStats* stats) const;
  SequentialModel load(const TaskContext& ctx) const;
  void persist(const SequentialModel& model, const TaskContext& ctx, Operation op) const;
  std::filesystem::path pending_path(int model_id) const;

  template <typename T>
  static std::vector<T> decode(const std::vector<std::optional<nlohmann::json>>& raw) {
    std::vector<T> out;
    out.reserve(raw.size());
    for (const auto& r : raw) out.push_back(r->template get<T>());
    return out;
  }

  std::filesystem::path path_;
  int num_models_;
  std::shared_ptr<const ContextHandler> default_context_;
};

// Stacks per-model outputs (index = model id) into samples. Throws
// AssemblyError naming the first model whose shape differs from model 0.
Tensor3 assemble_samples(std::span<const Matrix> outputs);

}  // namespace uqwiz

#endif  // UQWIZ_ENSEMBLE_H_
