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

#include <charconv>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbpc/bounds.hpp"
#include "pbpc/harness/instance_io.hpp"
#include "pbpc/learning.hpp"
#include "pbpc/mechanism.hpp"

namespace pbpc::harness {

/// Shortest round-trip decimal text of a double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline json rationals_to_json(const std::vector<Rational>& v) {
  json out = json::array();
  for (const auto& r : v) out.push_back(rational_to_json(r));
  return out;
}

inline json bounds_to_json(const MarketInstance& inst, const BoundsReport& r) {
  json j{{"instance", inst.name},
         {"digest", instance_digest(inst)},
         {"b_high", r.b_high},
         {"b_low", r.b_low},
         {"b_high_witness", r.b_high_witness},
         {"eligible", r.eligible},
         {"truthful_pivot", r.truthful_pivot},
         {"pc_floor", r.pc_floor},
         {"pc_floor_exact", rational_to_json(r.pc_floor_exact)},
         {"pc_pure_price", r.pc_pure_price},
         {"pc_pure_ne", r.pc_pure_ne},
         {"pc_pure_ne_verified", r.pc_pure_ne_verified},
         {"pb_interval", {r.pb_interval_lo, r.pb_interval_hi}}};
  j["refined_pb_bound"] =
      r.refined_pb_bound ? rational_to_json(*r.refined_pb_bound) : json(nullptr);
  return j;
}

inline json outcome_to_json(Mechanism mech, const Outcome& o) {
  return json{{"mechanism", to_string(mech)},
              {"allocation", rationals_to_json(o.allocation)},
              {"prices", rationals_to_json(o.prices)},
              {"clearing_price", o.clearing_price},
              {"pivotal_agent", o.pivotal_agent},
              {"unit_price", rational_to_json(o.unit_price)}};
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "iteration,unit_price,normalized_unit_price,time_avg_unit_price\n";
  for (const auto& r : traj.records) {
    out += std::to_string(r.iteration);
    out += ',';
    out += format_double(r.unit_price);
    out += ',';
    out += format_double(r.normalized_unit_price);
    out += ',';
    out += format_double(r.time_avg_unit_price);
    out += '\n';
  }
  return out;
}

inline json summary_to_json(const TrajectorySummary& s) {
  return json{{"window", s.window},
              {"window_mean_normalized", s.window_mean},
              {"window_min_normalized", s.window_min},
              {"window_max_normalized", s.window_max},
              {"time_avg_unit_price", s.time_avg_unit_price}};
}

}  // namespace pbpc::harness
