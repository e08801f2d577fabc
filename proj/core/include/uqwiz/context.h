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

#ifndef UQWIZ_CONTEXT_H_
#define UQWIZ_CONTEXT_H_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace uqwiz {

// An abstract execution device. `capacity` caps the number of workers placed
// on the slot at the same time; `memory_hint` is passed to workers but not
// enforced.
struct DeviceSlot {
  std::string device_id;
  std::size_t capacity = 1;
  std::string memory_hint;

  friend bool operator==(const DeviceSlot&, const DeviceSlot&) = default;
};

// Per-worker initialization policy of a pool run. Subclass to place workers
// on custom slots or prepare the worker environment.
class ContextHandler {
 public:
  virtual ~ContextHandler() = default;

  virtual std::string_view name() const = 0;

  // Throws ContextError when this handler cannot run `num_processes` workers.
  virtual void validate(std::size_t num_processes) const = 0;

  // Slots available to a run with `num_processes` workers.
  virtual std::vector<DeviceSlot> slots(std::size_t num_processes) const = 0;

  // Runs inside every freshly spawned worker before its first task. The
  // default exports UQWIZ_DEVICE and UQWIZ_MEMORY_HINT.
  virtual void initialize_worker(const DeviceSlot& slot) const;
};

// Sequential execution in the calling process; num_processes must be 0.
std::shared_ptr<const ContextHandler> none_context();

// All workers share one slot without a concurrency cap.
std::shared_ptr<const ContextHandler> dynamic_growth_context();

// User-declared slots; the capacities must add up to at least the number of
// processes.
std::shared_ptr<const ContextHandler> device_allocator_context(std::vector<DeviceSlot> slots);

// none_context for 0 processes, dynamic_growth_context otherwise.
std::shared_ptr<const ContextHandler> default_context(std::size_t num_processes);

}  // namespace uqwiz

#endif  // UQWIZ_CONTEXT_H_
