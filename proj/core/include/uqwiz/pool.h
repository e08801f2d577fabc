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

#ifndef UQWIZ_POOL_H_
#define UQWIZ_POOL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uqwiz/context.h"

namespace uqwiz {

struct PoolConfig {
  // 0 runs every task in the calling process. k > 0 runs tasks in k worker
  // processes and the calling process only coordinates.
  std::size_t num_processes = 0;
  // Tasks a worker runs before it is discarded and replaced.
  std::size_t models_per_process_before_respawn = 1;
  std::uint64_t base_seed = 0;
};

// Load (+1) or release (-1) of an in-memory model, stamped with the
// system-wide monotonic clock so events from different processes order.
struct ModelEvent {
  std::int64_t time_ns = 0;
  int delta = 0;
};

// What a task sees about itself.
class TaskContext {
 public:
  TaskContext(int model_id, std::uint64_t seed, int attempt, DeviceSlot slot, bool in_worker)
      : model_id_(model_id), seed_(seed), attempt_(attempt), slot_(std::move(slot)),
        in_worker_(in_worker) {}

  int model_id() const { return model_id_; }
  // derive_seed(base_seed, model_id).
  std::uint64_t seed() const { return seed_; }
  // 0 on the first try, 1 on the retry after a worker crash.
  int attempt() const { return attempt_; }
  const DeviceSlot& slot() const { return slot_; }
  bool in_worker() const { return in_worker_; }

  // Instrumentation hooks for the laziness bound.
  void note_model_loaded() const;
  void note_model_released() const;
  const std::vector<ModelEvent>& events() const { return events_; }

 private:
  int model_id_;
  std::uint64_t seed_;
  int attempt_;
  DeviceSlot slot_;
  bool in_worker_;
  mutable std::vector<ModelEvent> events_;
};

// Marks one in-memory model for the lifetime of the lease. Declare it before
// the model so the release is stamped after the model is destroyed.
class ModelLease {
 public:
  explicit ModelLease(const TaskContext& ctx) : ctx_(ctx) { ctx_.note_model_loaded(); }
  ~ModelLease() { ctx_.note_model_released(); }
  ModelLease(const ModelLease&) = delete;
  ModelLease& operator=(const ModelLease&) = delete;

 private:
  const TaskContext& ctx_;
};

// A task maps its context to a JSON-encodable generic result. Tasks run in
// forked workers, so a task may capture anything that is valid in a copy of
// the calling process; results cross the process boundary as CBOR.
using PoolTask = std::function<nlohmann::json(const TaskContext&)>;

struct PoolStats {
  std::size_t worker_incarnations = 0;
  std::vector<int> worker_pids;
  std::size_t retries = 0;
  // Maximum number of models simultaneously held in memory across all
  // processes, reconstructed from load/release events.
  std::size_t peak_concurrent_models = 0;
  // Maximum number of simultaneously alive workers per slot device id.
  std::map<std::string, std::size_t> peak_slot_occupancy;
  std::vector<std::string> warnings;
};

struct PoolOutcome {
  // results[i] belongs to ids[i]; empty for failed ids.
  std::vector<std::optional<nlohmann::json>> results;
  // Failed ids with diagnostics. Exceptions thrown by a task fail its id
  // immediately; a crashed worker's task is retried once on a fresh worker.
  std::map<int, std::string> failures;
  PoolStats stats;
};

// Runs `task` once per id. Validates `context` against num_processes
// (ContextError). Always drains every worker before returning.
PoolOutcome run_pool(const PoolTask& task, std::span<const int> ids, const PoolConfig& pool,
                     const ContextHandler& context);

}  // namespace uqwiz

#endif  // UQWIZ_POOL_H_
