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

// Single-demand procurement market: producers with bounded supply and integer
// marginal cost, integer bids in [0, max_bid], and the cost-minimizing
// allocation with ties broken by agent index. Agents are 0-based.

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "pbpc/errors.hpp"
#include "pbpc/rational.hpp"

namespace pbpc {

struct Producer {
  Rational supply;
  int cost = 0;

  bool operator==(const Producer&) const = default;
};

struct MarketInstance {
  std::string name;
  int max_bid = 0;
  std::vector<Producer> producers;

  int num_agents() const { return static_cast<int>(producers.size()); }
  const Rational& supply(int i) const { return producers[i].supply; }
  int cost(int i) const { return producers[i].cost; }

  bool operator==(const MarketInstance&) const = default;
};

// One integer bid per agent.
using BidProfile = std::vector<int>;

// Amount bought from each agent.
using Allocation = std::vector<Rational>;

struct ValidationReport {
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

inline Rational total_supply(const MarketInstance& inst) {
  Rational sum = 0;
  for (const auto& p : inst.producers) sum += p.supply;
  return sum;
}

/// Lists every violated constraint; never throws.
inline ValidationReport validate_instance(const MarketInstance& inst) {
  ValidationReport report;
  if (inst.producers.empty()) {
    report.problems.push_back("instance has no producers");
  }
  if (inst.max_bid < 0) {
    report.problems.push_back("max_bid " + std::to_string(inst.max_bid) +
                              " is negative");
  }
  for (int i = 0; i < inst.num_agents(); ++i) {
    const Producer& p = inst.producers[i];
    std::string who = "producer " + std::to_string(i);
    if (p.supply <= 0 || p.supply > 1) {
      report.problems.push_back(who + ": supply " + to_string(p.supply) +
                                " outside (0, 1]");
    }
    if (p.cost < 0) {
      report.problems.push_back(who + ": cost " + std::to_string(p.cost) +
                                " is negative");
    }
    if (p.cost > inst.max_bid) {
      report.problems.push_back(who + ": cost " + std::to_string(p.cost) +
                                " exceeds bid ceiling " +
                                std::to_string(inst.max_bid));
    }
  }
  if (!inst.producers.empty()) {
    Rational total = total_supply(inst);
    if (total < 1) {
      report.problems.push_back("total supply " + to_string(total) +
                                " < 1: demand cannot be covered");
    }
  }
  return report;
}

inline void require_valid(const MarketInstance& inst) {
  ValidationReport report = validate_instance(inst);
  if (report.ok()) return;
  bool only_supply = report.problems.size() == 1 &&
                     report.problems.front().rfind("total supply", 0) == 0;
  if (only_supply) throw InfeasibleInstance(report.problems.front());
  throw ValidationError(report.problems);
}

inline void check_profile(const MarketInstance& inst, const BidProfile& b) {
  if (static_cast<int>(b.size()) != inst.num_agents()) {
    throw InvalidArgument("profile has " + std::to_string(b.size()) +
                          " bids for " + std::to_string(inst.num_agents()) +
                          " agents");
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] < 0 || b[i] > inst.max_bid) {
      throw InvalidArgument("bid " + std::to_string(b[i]) + " of agent " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(inst.max_bid) + "]");
    }
  }
}

inline BidProfile truthful_profile(const MarketInstance& inst) {
  BidProfile b(inst.producers.size());
  for (int i = 0; i < inst.num_agents(); ++i) b[i] = inst.cost(i);
  return b;
}

/// Merit order: lower bid first, lower index on ties.
inline bool precedes(const BidProfile& b, int i, int j) {
  int n = static_cast<int>(b.size());
  if (i < 0 || i >= n || j < 0 || j >= n) {
    throw InvalidArgument("agent index out of range");
  }
  if (i == j) throw InvalidArgument("precedes needs two distinct agents");
  return b[i] < b[j] || (b[i] == b[j] && i < j);
}

inline std::vector<int> merit_order(const BidProfile& b) {
  std::vector<int> order(b.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return b[x] < b[y]; });
  return order;
}

/// Position of the pivotal agent within `order`.
inline std::size_t pivot_position(const MarketInstance& inst,
                                  const std::vector<int>& order) {
  Rational covered = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    covered += inst.supply(order[k]);
    if (covered >= 1) return k;
  }
  throw InfeasibleInstance("total supply " + to_string(covered) +
                           " < 1: demand cannot be covered");
}

inline int pivotal_agent(const MarketInstance& inst, const BidProfile& b) {
  check_profile(inst, b);
  std::vector<int> order = merit_order(b);
  return order[pivot_position(inst, order)];
}

inline int clearing_price(const MarketInstance& inst, const BidProfile& b) {
  return b[pivotal_agent(inst, b)];
}

/// Greedy fill along the merit order; the pivotal agent covers the residual.
inline Allocation allocate(const MarketInstance& inst, const BidProfile& b) {
  check_profile(inst, b);
  std::vector<int> order = merit_order(b);
  std::size_t pivot = pivot_position(inst, order);
  Allocation x(b.size(), Rational(0));
  Rational covered = 0;
  for (std::size_t k = 0; k < pivot; ++k) {
    x[order[k]] = inst.supply(order[k]);
    covered += inst.supply(order[k]);
  }
  x[order[pivot]] = 1 - covered;
  return x;
}

}  // namespace pbpc
