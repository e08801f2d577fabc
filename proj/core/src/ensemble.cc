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

#include "uqwiz/ensemble.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <fstream>
#include <sstream>

#include "uqwiz/errors.h"
#include "uqwiz/persist.h"

namespace uqwiz {
namespace {

constexpr int kManifestVersion = 1;

// Exclusive claim on an ensemble directory for the duration of a pool run.
class DirectoryLock {
 public:
  explicit DirectoryLock(std::filesystem::path path) : path_(std::move(path)) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST) {
        throw LockError("another pool run holds " + path_.string() +
                        "; remove the file if no run is active");
      }
      throw IoError("cannot create lock file " + path_.string());
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~DirectoryLock() {
    std::error_code ignored;
    std::filesystem::remove(path_, ignored);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

void check_sampling_based(const QuantifierDescriptor& q) {
  if (!q.is_sampling_based) {
    throw UnsupportedQuantifierError(
        "quantifier '" + q.canonical_name +
        "' is a point-predictor quantifier; point predictors are single-model, quantify on a "
        "single atomic model instead");
  }
}

}  // namespace

LazyEnsemble::LazyEnsemble(std::filesystem::path path, int num_models,
                           std::shared_ptr<const ContextHandler> default_context)
    : path_(std::move(path)), num_models_(num_models),
      default_context_(std::move(default_context)) {
  if (num_models_ < 2) {
    throw ValidationError("an ensemble needs more than one model, got " +
                          std::to_string(num_models_));
  }
}

LazyEnsemble LazyEnsemble::open(const std::filesystem::path& path) {
  std::ifstream in(path / "ensemble.json");
  if (!in) throw IoError("no ensemble manifest in " + path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("unreadable ensemble manifest: " + std::string(e.what()));
  }
  if (manifest.value("version", 0) != kManifestVersion) {
    throw FormatError("unsupported ensemble manifest version");
  }
  return LazyEnsemble(path, manifest.at("num_models").get<int>());
}

bool LazyEnsemble::is_ensemble_dir(const std::filesystem::path& path) {
  std::error_code ec;
  return std::filesystem::is_directory(path, ec) &&
         std::filesystem::is_regular_file(path / "ensemble.json", ec);
}

std::filesystem::path LazyEnsemble::model_path(int model_id) const {
  return path_ / ("model_" + std::to_string(model_id) + ".uwm");
}

std::filesystem::path LazyEnsemble::pending_path(int model_id) const {
  auto p = model_path(model_id);
  p += ".pending";
  return p;
}

LazyEnsemble LazyEnsemble::with_context(std::shared_ptr<const ContextHandler> context) const {
  LazyEnsemble copy = *this;
  copy.default_context_ = std::move(context);
  return copy;
}

SequentialModel LazyEnsemble::load(const TaskContext& ctx) const {
  return load_model(model_path(ctx.model_id()), ctx.seed());
}

void LazyEnsemble::persist(const SequentialModel& model, const TaskContext& ctx,
                           Operation op) const {
  save_model(model, op == Operation::kModify ? pending_path(ctx.model_id())
                                             : model_path(ctx.model_id()));
}

std::vector<std::optional<nlohmann::json>> LazyEnsemble::run(Operation op, const PoolTask& task,
                                                             const PoolConfig& pool,
                                                             PoolStats* stats) const {
  const auto context = default_context_ ? default_context_ : default_context(pool.num_processes);
  context->validate(pool.num_processes);

  namespace fs = std::filesystem;
  if (op == Operation::kCreate) {
    fs::create_directories(path_);
    for (int id = 0; id < num_models_; ++id) {
      if (fs::exists(model_path(id))) {
        throw ValidationError("refusing to overwrite: " + model_path(id).string() + " exists");
      }
    }
    if (fs::exists(manifest_path())) {
      throw ValidationError("refusing to overwrite: " + manifest_path().string() + " exists");
    }
  } else {
    std::vector<int> missing;
    for (int id = 0; id < num_models_; ++id) {
      if (!fs::is_regular_file(model_path(id))) missing.push_back(id);
    }
    if (!missing.empty()) {
      std::ostringstream os;
      os << "ensemble " << path_.string() << " is missing model file(s) for id(s)";
      for (int id : missing) os << ' ' << id;
      throw MissingModelError(os.str());
    }
  }

  const DirectoryLock lock(lock_path());
  std::vector<int> ids(static_cast<std::size_t>(num_models_));
  for (int id = 0; id < num_models_; ++id) ids[static_cast<std::size_t>(id)] = id;
  PoolOutcome outcome = run_pool(task, ids, pool, *context);
  if (stats != nullptr) *stats = outcome.stats;

  std::error_code ignored;
  if (!outcome.failures.empty()) {
    if (op == Operation::kCreate) {
      for (const auto& [id, _] : outcome.failures) fs::remove(model_path(id), ignored);
    } else if (op == Operation::kModify) {
      for (int id : ids) fs::remove(pending_path(id), ignored);
    }
    throw TaskFailure(std::move(outcome.failures));
  }

  if (op == Operation::kModify) {
    for (int id : ids) fs::rename(pending_path(id), model_path(id));
  } else if (op == Operation::kCreate) {
    const nlohmann::json manifest{{"version", kManifestVersion},
                                  {"num_models", num_models_},
                                  {"base_seed", pool.base_seed}};
    const std::string text = manifest.dump(2) + "\n";
    write_file_atomic(manifest_path(), std::as_bytes(std::span(text.data(), text.size())));
  }
  return std::move(outcome.results);
}

std::vector<QuantifiedResult> LazyEnsemble::quantify_predictions(
    std::span<const QuantifierDescriptor* const> quantifiers, const Consumer<Matrix>& consumer,
    const PoolConfig& pool, std::optional<bool> as_confidence, PoolStats* stats) const {
  if (quantifiers.empty()) throw ValidationError("no quantifier requested");
  for (const auto* q : quantifiers) check_sampling_based(*q);

  const auto outputs = consume<Matrix>(consumer, pool, stats);
  const Tensor3 samples = assemble_samples(outputs);
  std::vector<QuantifiedResult> results;
  results.reserve(quantifiers.size());
  for (const auto* q : quantifiers) {
    results.push_back(convert_score(q->sampled(samples), as_confidence));
  }
  return results;
}

std::vector<QuantifiedResult> LazyEnsemble::quantify_predictions(
    const std::vector<std::string>& aliases, const Consumer<Matrix>& consumer,
    const PoolConfig& pool, std::optional<bool> as_confidence, PoolStats* stats) const {
  const auto resolved = resolve_quantifiers(aliases);
  return quantify_predictions(std::span<const QuantifierDescriptor* const>(resolved), consumer,
                              pool, as_confidence, stats);
}

std::vector<QuantifiedResult> LazyEnsemble::predict_quantified(
    const Matrix& x, std::span<const QuantifierDescriptor* const> quantifiers,
    const PoolConfig& pool, std::optional<bool> as_confidence, PoolStats* stats) const {
  for (const auto* q : quantifiers) check_sampling_based(*q);
  const Consumer<Matrix> forward = [&x](SequentialModel& model, const TaskContext&) {
    return model.forward(x);
  };
  return quantify_predictions(quantifiers, forward, pool, as_confidence, stats);
}

std::vector<QuantifiedResult> LazyEnsemble::predict_quantified(
    const Matrix& x, const std::vector<std::string>& aliases, const PoolConfig& pool,
    std::optional<bool> as_confidence, PoolStats* stats) const {
  const auto resolved = resolve_quantifiers(aliases);
  return predict_quantified(x, std::span<const QuantifierDescriptor* const>(resolved), pool,
                            as_confidence, stats);
}

QuantifiedResult LazyEnsemble::predict_quantified(const Matrix& x, std::string_view alias,
                                                  const PoolConfig& pool,
                                                  std::optional<bool> as_confidence,
                                                  PoolStats* stats) const {
  const QuantifierDescriptor* one[] = {&lookup_quantifier(alias)};
  return std::move(predict_quantified(x, one, pool, as_confidence, stats).front());
}

Tensor3 assemble_samples(std::span<const Matrix> outputs) {
  if (outputs.empty()) throw AssemblyError("no model outputs to assemble", -1);
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    if (outputs[i].rows() != outputs[0].rows() || outputs[i].cols() != outputs[0].cols()) {
      std::ostringstream os;
      os << "model " << i << " returned a " << outputs[i].rows() << "x" << outputs[i].cols()
         << " output, model 0 returned " << outputs[0].rows() << "x" << outputs[0].cols();
      throw AssemblyError(os.str(), static_cast<int>(i));
    }
  }
  return Tensor3::stack_samples(outputs);
}

}  // namespace uqwiz
