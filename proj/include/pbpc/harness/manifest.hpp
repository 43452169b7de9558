// Copyright 2026 The pbpc Authors.
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

#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbpc/harness/instance_io.hpp"
#include "pbpc/learning.hpp"

namespace pbpc::harness {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json sim_config_to_json(const SimConfig& cfg) {
  json j{{"mechanism", to_string(cfg.mechanism)},
         {"iterations", cfg.iterations},
         {"seed", cfg.seed},
         {"snapshot_every", cfg.snapshot_every},
         {"feedback", to_string(cfg.feedback)},
         {"exact_budget", cfg.exact_budget}};
  j["learning_rate"] = cfg.learning_rate ? json(*cfg.learning_rate) : json("auto");
  return j;
}

inline SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  try {
    cfg.mechanism = parse_mechanism(j.at("mechanism").get<std::string>());
    cfg.iterations = j.at("iterations").get<std::uint64_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.snapshot_every = j.value("snapshot_every", std::uint64_t{1});
    cfg.feedback = parse_feedback(j.value("feedback", std::string("sampled")));
    cfg.exact_budget = j.value("exact_budget", cfg.exact_budget);
    if (j.contains("learning_rate") && j["learning_rate"].is_number()) {
      cfg.learning_rate = j["learning_rate"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad simulation config: ") + e.what());
  }
  return cfg;
}

/// Everything needed to rerun a simulation. Worker count is recorded for
/// information only; it does not affect results.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string instance_digest;
  json instance;
  SimConfig config;
  int workers = 1;
  double learning_rate = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;

  json to_json() const {
    json cfg = sim_config_to_json(config);
    return json{{"tool_version", tool_version},
                {"instance_digest", instance_digest},
                {"instance", instance},
                {"config", cfg},
                {"seed", config.seed},
                {"workers", workers},
                {"effective_learning_rate", learning_rate},
                {"started_at", started_at},
                {"finished_at", finished_at},
                {"outputs", outputs}};
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    try {
      m.tool_version = j.at("tool_version").get<std::string>();
      m.instance_digest = j.at("instance_digest").get<std::string>();
      m.instance = j.at("instance");
      m.config = sim_config_from_json(j.at("config"));
      m.workers = j.value("workers", 1);
      m.learning_rate = j.value("effective_learning_rate", 0.0);
      m.started_at = j.value("started_at", std::string());
      m.finished_at = j.value("finished_at", std::string());
      m.outputs = j.value("outputs", std::vector<std::string>{});
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad manifest: ") + e.what());
    }
    return m;
  }
};

}  // namespace pbpc::harness
