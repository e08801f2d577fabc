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

#include "uqwiz/context.h"

#include <cstdlib>
#include <numeric>

#include "uqwiz/errors.h"

namespace uqwiz {
namespace {

class NoneContext final : public ContextHandler {
 public:
  std::string_view name() const override { return "none"; }

  void validate(std::size_t num_processes) const override {
    if (num_processes != 0) {
      throw ContextError("the none context runs in the main process and requires 0 processes, got " +
                         std::to_string(num_processes));
    }
  }

  std::vector<DeviceSlot> slots(std::size_t) const override { return {{"main", 1, ""}}; }
};

class DynamicGrowthContext final : public ContextHandler {
 public:
  std::string_view name() const override { return "dynamic_growth"; }

  void validate(std::size_t) const override {}

  std::vector<DeviceSlot> slots(std::size_t num_processes) const override {
    return {{"shared", std::max<std::size_t>(num_processes, 1), ""}};
  }
};

class DeviceAllocatorContext final : public ContextHandler {
 public:
  explicit DeviceAllocatorContext(std::vector<DeviceSlot> slots) : slots_(std::move(slots)) {}

  std::string_view name() const override { return "device_allocator"; }

  void validate(std::size_t num_processes) const override {
    if (slots_.empty()) throw ContextError("the device allocator needs at least one slot");
    const std::size_t total = std::accumulate(
        slots_.begin(), slots_.end(), std::size_t{0},
        [](std::size_t acc, const DeviceSlot& s) { return acc + s.capacity; });
    if (total < num_processes) {
      throw ContextError("device slots admit " + std::to_string(total) + " workers, " +
                         std::to_string(num_processes) + " processes requested");
    }
  }

  std::vector<DeviceSlot> slots(std::size_t) const override { return slots_; }

 private:
  std::vector<DeviceSlot> slots_;
};

}  // namespace

void ContextHandler::initialize_worker(const DeviceSlot& slot) const {
  ::setenv("UQWIZ_DEVICE", slot.device_id.c_str(), 1);
  ::setenv("UQWIZ_MEMORY_HINT", slot.memory_hint.c_str(), 1);
}

std::shared_ptr<const ContextHandler> none_context() {
  static const auto instance = std::make_shared<const NoneContext>();
  return instance;
}

std::shared_ptr<const ContextHandler> dynamic_growth_context() {
  static const auto instance = std::make_shared<const DynamicGrowthContext>();
  return instance;
}

std::shared_ptr<const ContextHandler> device_allocator_context(std::vector<DeviceSlot> slots) {
  for (const auto& s : slots) {
    if (s.capacity == 0) throw ContextError("device slot '" + s.device_id + "' has capacity 0");
  }
  return std::make_shared<const DeviceAllocatorContext>(std::move(slots));
}

std::shared_ptr<const ContextHandler> default_context(std::size_t num_processes) {
  return num_processes == 0 ? none_context() : dynamic_growth_context();
}

}  // namespace uqwiz
