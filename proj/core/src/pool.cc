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

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <deque>

#include "uqwiz/errors.h"
#include "uqwiz/random.h"

namespace uqwiz {
namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool send_all(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

bool recv_all(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::recv(fd, data, size, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

// Frames are a native u32 length followed by a CBOR document.
bool send_frame(int fd, const nlohmann::json& message) {
  std::vector<std::uint8_t> body;
  try {
    body = nlohmann::json::to_cbor(message);
  } catch (const std::exception&) {
    return false;
  }
  const auto size = static_cast<std::uint32_t>(body.size());
  return send_all(fd, reinterpret_cast<const std::uint8_t*>(&size), sizeof(size)) &&
         send_all(fd, body.data(), body.size());
}

std::optional<nlohmann::json> recv_frame(int fd) {
  std::uint32_t size = 0;
  if (!recv_all(fd, reinterpret_cast<std::uint8_t*>(&size), sizeof(size))) return std::nullopt;
  std::vector<std::uint8_t> body(size);
  if (!recv_all(fd, body.data(), body.size())) return std::nullopt;
  try {
    return nlohmann::json::from_cbor(body);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

nlohmann::json encode_events(const std::vector<ModelEvent>& events) {
  auto out = nlohmann::json::array();
  for (const auto& e : events) out.push_back({e.time_ns, e.delta});
  return out;
}

void decode_events(const nlohmann::json& j, std::vector<ModelEvent>& sink) {
  for (const auto& e : j) sink.push_back({e.at(0).get<std::int64_t>(), e.at(1).get<int>()});
}

std::size_t peak_concurrency(std::vector<ModelEvent> events) {
  // Loads sort before releases at equal timestamps, erring high.
  std::ranges::sort(events, [](const ModelEvent& a, const ModelEvent& b) {
    return a.time_ns != b.time_ns ? a.time_ns < b.time_ns : a.delta > b.delta;
  });
  long current = 0;
  long peak = 0;
  for (const auto& e : events) {
    current += e.delta;
    peak = std::max(peak, current);
  }
  return static_cast<std::size_t>(peak);
}

std::string describe_status(int status) {
  if (WIFSIGNALED(status)) return "worker killed by signal " + std::to_string(WTERMSIG(status));
  if (WIFEXITED(status)) return "worker exited with status " + std::to_string(WEXITSTATUS(status));
  return "worker ended abnormally";
}

nlohmann::json run_task(const PoolTask& task, const TaskContext& ctx) {
  nlohmann::json reply{{"id", ctx.model_id()}, {"pid", static_cast<int>(::getpid())}};
  try {
    reply["result"] = task(ctx);
    reply["ok"] = true;
  } catch (const std::exception& e) {
    reply["ok"] = false;
    reply["error"] = e.what();
  } catch (...) {
    reply["ok"] = false;
    reply["error"] = "task threw a non-standard exception";
  }
  reply["events"] = encode_events(ctx.events());
  return reply;
}

[[noreturn]] void worker_main(int fd, const PoolTask& task, const ContextHandler& context,
                              const DeviceSlot& slot, std::uint64_t base_seed) {
  try {
    context.initialize_worker(slot);
  } catch (...) {
    ::_exit(3);
  }
  while (true) {
    const auto message = recv_frame(fd);
    if (!message || message->contains("stop")) ::_exit(0);
    try {
      const int id = message->at("id").get<int>();
      const TaskContext ctx(id, derive_seed(base_seed, static_cast<std::uint64_t>(id)),
                            message->at("attempt").get<int>(), slot, /*in_worker=*/true);
      if (!send_frame(fd, run_task(task, ctx))) ::_exit(4);
    } catch (...) {
      ::_exit(5);
    }
  }
}

struct Item {
  std::size_t index;
  int attempt;
};

struct Worker {
  pid_t pid = -1;
  int fd = -1;
  std::size_t slot = 0;
  std::size_t done = 0;
  std::optional<Item> in_flight;
};

class Coordinator {
 public:
  Coordinator(const PoolTask& task, std::span<const int> ids, const PoolConfig& pool,
              const ContextHandler& context, PoolOutcome& out, std::vector<ModelEvent>& events)
      : task_(task), ids_(ids), pool_(pool), context_(context), out_(out), events_(events),
        slots_(context.slots(pool.num_processes)), occupancy_(slots_.size(), 0) {
    for (std::size_t i = 0; i < ids.size(); ++i) pending_.push_back({i, 0});
  }

  ~Coordinator() {
    // Only reached with live workers when the coordinator itself failed.
    for (auto& w : workers_) {
      ::kill(w.pid, SIGKILL);
      reap(w);
    }
  }

  void run() {
    while (!pending_.empty() || !workers_.empty()) {
      while (workers_.size() < pool_.num_processes && !pending_.empty()) {
        const auto slot = free_slot();
        if (!slot) break;
        workers_.push_back(spawn(*slot));
        assign(workers_.back());
      }
      if (workers_.empty()) throw ContextError("no device slot can host a worker");
      wait_and_dispatch();
    }
  }

 private:
  std::optional<std::size_t> free_slot() const {
    std::optional<std::size_t> best;
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      if (occupancy_[s] >= slots_[s].capacity) continue;
      if (!best || occupancy_[s] < occupancy_[*best]) best = s;
    }
    return best;
  }

  Worker spawn(std::size_t slot) {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) throw Error("socketpair failed");
    std::fflush(nullptr);
    const pid_t pid = ::fork();
    if (pid < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      throw Error("fork failed");
    }
    if (pid == 0) {
      ::close(sv[0]);
      for (const auto& w : workers_) ::close(w.fd);
      worker_main(sv[1], task_, context_, slots_[slot], pool_.base_seed);
    }
    ::close(sv[1]);
    ++out_.stats.worker_incarnations;
    out_.stats.worker_pids.push_back(pid);
    ++occupancy_[slot];
    auto& peak = out_.stats.peak_slot_occupancy[slots_[slot].device_id];
    peak = std::max(peak, occupancy_[slot]);
    return Worker{pid, sv[0], slot, 0, std::nullopt};
  }

  void assign(Worker& w) {
    const Item item = pending_.front();
    pending_.pop_front();
    w.in_flight = item;
    // A failed send surfaces as a hang-up on the next poll.
    send_frame(w.fd, {{"id", ids_[item.index]}, {"attempt", item.attempt}});
  }

  int reap(Worker& w) {
    if (w.fd >= 0) ::close(w.fd);
    w.fd = -1;
    int status = 0;
    while (::waitpid(w.pid, &status, 0) < 0 && errno == EINTR) {
    }
    --occupancy_[w.slot];
    return status;
  }

  void retire(Worker& w) {
    send_frame(w.fd, {{"stop", true}});
    reap(w);
  }

  void wait_and_dispatch() {
    std::vector<pollfd> fds;
    fds.reserve(workers_.size());
    for (const auto& w : workers_) fds.push_back({w.fd, POLLIN, 0});
    while (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno != EINTR) throw Error("poll failed");
    }

    std::vector<bool> gone(workers_.size(), false);
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].revents == 0) continue;
      Worker& w = workers_[i];
      const auto reply = recv_frame(w.fd);
      if (reply && w.in_flight && reply->value("id", -1) == ids_[w.in_flight->index]) {
        record(*w.in_flight, *reply);
        ++w.done;
        w.in_flight.reset();
        if (w.done < pool_.models_per_process_before_respawn && !pending_.empty()) {
          assign(w);
        } else {
          retire(w);
          gone[i] = true;
        }
      } else {
        const int status = reap(w);
        gone[i] = true;
        if (w.in_flight) crashed(*w.in_flight, describe_status(status));
      }
    }
    std::vector<Worker> alive;
    for (std::size_t i = 0; i < workers_.size(); ++i) {
      if (!gone[i]) alive.push_back(workers_[i]);
    }
    workers_ = std::move(alive);
  }

  void record(const Item& item, const nlohmann::json& reply) {
    decode_events(reply.at("events"), events_);
    const int id = ids_[item.index];
    if (reply.at("ok").get<bool>()) {
      out_.results[item.index] = reply.at("result");
    } else {
      out_.failures[id] = reply.at("error").get<std::string>();
    }
  }

  void crashed(const Item& item, const std::string& why) {
    if (item.attempt == 0) {
      ++out_.stats.retries;
      pending_.push_front({item.index, 1});
    } else {
      out_.failures[ids_[item.index]] = why + " (after one retry)";
    }
  }

  const PoolTask& task_;
  std::span<const int> ids_;
  const PoolConfig& pool_;
  const ContextHandler& context_;
  PoolOutcome& out_;
  std::vector<ModelEvent>& events_;
  std::vector<DeviceSlot> slots_;
  std::vector<std::size_t> occupancy_;
  std::deque<Item> pending_;
  std::vector<Worker> workers_;
};

}  // namespace

void TaskContext::note_model_loaded() const { events_.push_back({now_ns(), +1}); }
void TaskContext::note_model_released() const { events_.push_back({now_ns(), -1}); }

PoolOutcome run_pool(const PoolTask& task, std::span<const int> ids, const PoolConfig& pool,
                     const ContextHandler& context) {
  context.validate(pool.num_processes);
  if (pool.models_per_process_before_respawn == 0) {
    throw ValidationError("models_per_process_before_respawn must be at least 1");
  }

  PoolOutcome out;
  out.results.resize(ids.size());
  if (pool.num_processes > ids.size() && !ids.empty()) {
    out.stats.warnings.push_back(std::to_string(pool.num_processes) + " processes for " +
                                 std::to_string(ids.size()) + " tasks; extra workers stay idle");
  }

  std::vector<ModelEvent> events;
  if (pool.num_processes == 0) {
    const auto slots = context.slots(0);
    const DeviceSlot slot = slots.empty() ? DeviceSlot{"main", 1, ""} : slots.front();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const TaskContext ctx(ids[i], derive_seed(pool.base_seed, static_cast<std::uint64_t>(ids[i])),
                            0, slot, /*in_worker=*/false);
      const auto reply = run_task(task, ctx);
      events.insert(events.end(), ctx.events().begin(), ctx.events().end());
      if (reply.at("ok").get<bool>()) {
        out.results[i] = reply.at("result");
      } else {
        out.failures[ids[i]] = reply.at("error").get<std::string>();
      }
    }
  } else {
    Coordinator(task, ids, pool, context, out, events).run();
  }
  out.stats.peak_concurrent_models = peak_concurrency(std::move(events));
  return out;
}

}  // namespace uqwiz
