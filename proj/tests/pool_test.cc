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

#include "uqwiz/pool.h"

#include <gtest/gtest.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "uqwiz/errors.h"
#include "uqwiz/random.h"

namespace uqwiz {
namespace {

std::vector<int> iota_ids(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

PoolConfig workers(std::size_t k, std::size_t respawn = 1, std::uint64_t seed = 0) {
  PoolConfig p;
  p.num_processes = k;
  p.models_per_process_before_respawn = respawn;
  p.base_seed = seed;
  return p;
}

TEST(RunPool, SequentialMatchesDirectInvocation) {
  const auto task = [](const TaskContext& ctx) {
    return nlohmann::json{{"id", ctx.model_id()}, {"seed", ctx.seed()}, {"worker", ctx.in_worker()}};
  };
  const auto ids = iota_ids(5);
  const auto out = run_pool(task, ids, workers(0, 1, 77), *none_context());
  ASSERT_EQ(out.results.size(), 5u);
  for (int id : ids) {
    const TaskContext direct(id, derive_seed(77, id), 0, DeviceSlot{"main", 1, ""}, false);
    EXPECT_EQ(*out.results[id], task(direct));
  }
  EXPECT_TRUE(out.failures.empty());
  EXPECT_EQ(out.stats.worker_incarnations, 0u);
}

TEST(RunPool, ContextValidation) {
  const auto task = [](const TaskContext&) { return nlohmann::json(1); };
  const auto ids = iota_ids(2);
  EXPECT_THROW(run_pool(task, ids, workers(2), *none_context()), ContextError);
  EXPECT_THROW(run_pool(task, ids, workers(3), *device_allocator_context({{"a", 1, ""}, {"b", 1, ""}})),
               ContextError);
  EXPECT_THROW(device_allocator_context({{"a", 0, ""}}), ContextError);
  EXPECT_THROW(run_pool(task, ids, workers(1, 0), *dynamic_growth_context()), ValidationError);
  EXPECT_NO_THROW(run_pool(task, ids, workers(0), *dynamic_growth_context()));
}

TEST(RunPool, WorkersAreSeparateProcesses) {
  const auto task = [](const TaskContext& ctx) {
    return nlohmann::json{{"pid", static_cast<int>(::getpid())}, {"worker", ctx.in_worker()}};
  };
  const auto out = run_pool(task, iota_ids(8), workers(4), *dynamic_growth_context());
  std::set<int> pids;
  for (const auto& r : out.results) {
    EXPECT_TRUE(r->at("worker").get<bool>());
    pids.insert(r->at("pid").get<int>());
  }
  EXPECT_GE(pids.size(), 2u);
  EXPECT_FALSE(pids.contains(static_cast<int>(::getpid())));
}

TEST(RunPool, RespawnAfterEachTask) {
  const auto task = [](const TaskContext&) { return nlohmann::json(static_cast<int>(::getpid())); };
  auto out = run_pool(task, iota_ids(4), workers(2, 1), *dynamic_growth_context());
  EXPECT_EQ(out.stats.worker_incarnations, 4u);
  std::set<int> pids;
  for (const auto& r : out.results) pids.insert(r->get<int>());
  EXPECT_EQ(pids.size(), 4u);

  out = run_pool(task, iota_ids(4), workers(2, 2), *dynamic_growth_context());
  EXPECT_EQ(out.stats.worker_incarnations, 2u);
}

TEST(RunPool, DeviceSlotOccupancyRespectsCapacity) {
  const auto task = [](const TaskContext& ctx) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    const char* device = std::getenv("UQWIZ_DEVICE");
    return nlohmann::json{{"slot", ctx.slot().device_id}, {"env", device != nullptr ? device : ""}};
  };
  const auto ctx = device_allocator_context({{"A", 1, "1GB"}, {"B", 1, "1GB"}});
  const auto out = run_pool(task, iota_ids(6), workers(2), *ctx);
  std::set<std::string> used;
  for (const auto& r : out.results) {
    EXPECT_EQ(r->at("slot"), r->at("env"));
    used.insert(r->at("slot").get<std::string>());
  }
  EXPECT_EQ(used, (std::set<std::string>{"A", "B"}));
  for (const auto& [slot, peak] : out.stats.peak_slot_occupancy) EXPECT_LE(peak, 1u) << slot;
}

TEST(RunPool, ResultsFollowIdOrderUnderRandomDelays) {
  const auto task = [](const TaskContext& ctx) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ctx.seed() % 30));
    return nlohmann::json(ctx.model_id() * 10);
  };
  const std::vector<int> ids{4, 0, 3, 1, 2};
  const auto out = run_pool(task, ids, workers(3, 2, 5), *dynamic_growth_context());
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(out.results[i]->get<int>(), ids[i] * 10);
}

TEST(RunPool, SeedsDeriveFromBaseSeedAndId) {
  const auto task = [](const TaskContext& ctx) { return nlohmann::json(ctx.seed()); };
  const auto a = run_pool(task, iota_ids(4), workers(2, 1, 9), *dynamic_growth_context());
  const auto b = run_pool(task, iota_ids(4), workers(0, 1, 9), *none_context());
  for (int id = 0; id < 4; ++id) {
    EXPECT_EQ(a.results[id]->get<std::uint64_t>(), derive_seed(9, id));
    EXPECT_EQ(a.results[id], b.results[id]);
  }
}

TEST(RunPool, CrashedWorkerIsRetriedOnce) {
  const auto flaky = [](const TaskContext& ctx) {
    if (ctx.model_id() == 1 && ctx.attempt() == 0) std::_Exit(3);
    return nlohmann::json(ctx.attempt());
  };
  auto out = run_pool(flaky, iota_ids(3), workers(2), *dynamic_growth_context());
  EXPECT_TRUE(out.failures.empty());
  EXPECT_EQ(out.results[1]->get<int>(), 1);
  EXPECT_EQ(out.stats.retries, 1u);

  const auto doomed = [](const TaskContext& ctx) {
    if (ctx.model_id() == 2) std::_Exit(3);
    return nlohmann::json(0);
  };
  out = run_pool(doomed, iota_ids(4), workers(2), *dynamic_growth_context());
  ASSERT_EQ(out.failures.size(), 1u);
  EXPECT_TRUE(out.failures.contains(2));
  EXPECT_FALSE(out.results[2].has_value());
  EXPECT_TRUE(out.results[3].has_value());
}

TEST(RunPool, TaskExceptionFailsWithoutRetry) {
  const auto task = [](const TaskContext& ctx) -> nlohmann::json {
    if (ctx.model_id() == 0) throw std::runtime_error("bad input for zero");
    return ctx.attempt();
  };
  for (std::size_t k : {0u, 2u}) {
    const auto out = run_pool(task, iota_ids(3), workers(k), *default_context(k));
    ASSERT_TRUE(out.failures.contains(0));
    EXPECT_NE(out.failures.at(0).find("bad input for zero"), std::string::npos);
    EXPECT_EQ(out.stats.retries, 0u);
    EXPECT_EQ(out.results[1]->get<int>(), 0);
  }
}

TEST(RunPool, PeakModelsBoundedByProcessCount) {
  const auto task = [](const TaskContext& ctx) {
    const ModelLease lease(ctx);
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    return nlohmann::json(nullptr);
  };
  for (std::size_t k : {0u, 1u, 2u, 3u}) {
    const auto out = run_pool(task, iota_ids(6), workers(k), *default_context(k));
    EXPECT_GE(out.stats.peak_concurrent_models, 1u);
    EXPECT_LE(out.stats.peak_concurrent_models, std::max<std::size_t>(1, k)) << "k=" << k;
  }
}

TEST(RunPool, WarnsAboutIdleWorkers) {
  const auto task = [](const TaskContext&) { return nlohmann::json(0); };
  const auto out = run_pool(task, iota_ids(2), workers(4), *dynamic_growth_context());
  EXPECT_FALSE(out.stats.warnings.empty());
  EXPECT_TRUE(out.failures.empty());
}

}  // namespace
}  // namespace uqwiz
