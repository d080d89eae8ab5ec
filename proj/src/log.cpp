// Copyright 2026 The ratecon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "ratecon/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <mutex>
#include <set>

namespace ratecon::log {

spdlog::logger& get() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto existing = spdlog::get("ratecon");
    if (existing) return existing;
    auto created = spdlog::stderr_color_mt("ratecon");
    created->set_level(spdlog::level::warn);
    return created;
  }();
  return *logger;
}

void warn_once(const std::string& key, const std::string& message) {
  static std::mutex mutex;
  static std::set<std::string> seen;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (!seen.insert(key).second) return;
  }
  get().warn("{}", message);
}

}  // namespace ratecon::log
