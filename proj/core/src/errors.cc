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

#include "uqwiz/errors.h"

#include <sstream>

namespace uqwiz {
namespace {

std::string DescribeFailures(const std::map<int, std::string>& failures) {
  std::ostringstream os;
  os << failures.size() << " task(s) failed:";
  for (const auto& [id, why] : failures) os << "\n  model " << id << ": " << why;
  return os.str();
}

}  // namespace

TaskFailure::TaskFailure(std::map<int, std::string> failures)
    : Error(DescribeFailures(failures)), failures_(std::move(failures)) {}

std::vector<int> TaskFailure::failed_ids() const {
  std::vector<int> ids;
  ids.reserve(failures_.size());
  for (const auto& [id, _] : failures_) ids.push_back(id);
  return ids;
}

}  // namespace uqwiz
