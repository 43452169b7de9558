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

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "pbpc/errors.hpp"
#include "pbpc/market.hpp"
#include "pbpc/rational.hpp"

namespace pbpc {

enum class Mechanism { PayAsBid, PayAsClear, VCG };

inline const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::PayAsBid:
      return "pb";
    case Mechanism::PayAsClear:
      return "pc";
    case Mechanism::VCG:
      return "vcg";
  }
  return "?";
}

inline Mechanism parse_mechanism(std::string_view text) {
  std::string t;
  for (char ch : text) t.push_back(static_cast<char>(std::tolower(ch)));
  if (t == "pb" || t == "pay-as-bid" || t == "payasbid") {
    return Mechanism::PayAsBid;
  }
  if (t == "pc" || t == "pay-as-clear" || t == "payasclear") {
    return Mechanism::PayAsClear;
  }
  if (t == "vcg") return Mechanism::VCG;
  throw InvalidArgument("unknown mechanism '" + std::string(text) +
                        "' (expected pb, pc or vcg)");
}

inline constexpr Mechanism kAllMechanisms[] = {
    Mechanism::PayAsBid, Mechanism::PayAsClear, Mechanism::VCG};

struct Outcome {
  Allocation allocation;
  std::vector<Rational> prices;  // per unit
  int clearing_price = 0;
  int pivotal_agent = 0;
  Rational unit_price;  // sum of allocation * price
};

namespace detail {

// Cheapest way to buy one unit from `order` (skipping `skip`), with any
// shortfall bought at max_bid per unit.
inline Rational greedy_cost_without(const MarketInstance& inst,
                                    const BidProfile& b,
                                    const std::vector<int>& order, int skip) {
  Rational remaining = 1;
  Rational cost = 0;
  for (int j : order) {
    if (j == skip) continue;
    const Rational& s = inst.supply(j);
    if (s >= remaining) {
      cost += remaining * b[j];
      remaining = 0;
      break;
    }
    cost += s * b[j];
    remaining -= s;
  }
  if (remaining > 0) cost += remaining * inst.max_bid;
  return cost;
}

}  // namespace detail

/// Externality prices per unit; non-sellers get 0.
inline std::vector<Rational> vcg_prices(const MarketInstance& inst,
                                        const BidProfile& b) {
  Allocation x = allocate(inst, b);
  std::vector<int> order = merit_order(b);
  Rational total = 0;
  for (int j = 0; j < inst.num_agents(); ++j) total += x[j] * b[j];
  std::vector<Rational> prices(b.size(), Rational(0));
  for (int i = 0; i < inst.num_agents(); ++i) {
    if (x[i] == 0) continue;
    Rational without = detail::greedy_cost_without(inst, b, order, i);
    Rational others_now = total - x[i] * b[i];
    prices[i] = (without - others_now) / x[i];
  }
  return prices;
}

inline Outcome run_mechanism(Mechanism mech, const MarketInstance& inst,
                             const BidProfile& b) {
  Outcome out;
  out.allocation = allocate(inst, b);
  out.pivotal_agent = pivotal_agent(inst, b);
  out.clearing_price = b[out.pivotal_agent];
  switch (mech) {
    case Mechanism::PayAsBid:
      out.prices.reserve(b.size());
      for (int bid : b) out.prices.emplace_back(bid);
      break;
    case Mechanism::PayAsClear:
      out.prices.assign(b.size(), Rational(out.clearing_price));
      break;
    case Mechanism::VCG:
      out.prices = vcg_prices(inst, b);
      break;
  }
  out.unit_price = 0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    out.unit_price += out.allocation[j] * out.prices[j];
  }
  return out;
}

inline Rational utility(Mechanism mech, const MarketInstance& inst,
                        const BidProfile& b, int i) {
  if (i < 0 || i >= inst.num_agents()) {
    throw InvalidArgument("agent index out of range");
  }
  Outcome out = run_mechanism(mech, inst, b);
  return (out.prices[i] - inst.cost(i)) * out.allocation[i];
}

/// Agent utility as an affine function of its own bid on [lo, hi].
struct UtilitySegment {
  int lo = 0;
  int hi = 0;
  Rational slope;
  Rational intercept;

  Rational at(int v) const { return slope * v + intercept; }
};

/// Piecewise-affine form of bid -> utility for agent `i` with every other
/// agent's bid fixed by `others` (entry `i` is ignored). The pieces cover
/// [0, max_bid] in increasing order; adjacent equal pieces are merged.
/// One sort of the opponents plus a linear sweep.
inline std::vector<UtilitySegment> utility_segments(Mechanism mech,
                                                    const MarketInstance& inst,
                                                    const BidProfile& others,
                                                    int i) {
  const int n = inst.num_agents();
  const int max_bid = inst.max_bid;
  if (i < 0 || i >= n) throw InvalidArgument("agent index out of range");
  if (static_cast<int>(others.size()) != n) {
    throw InvalidArgument("opponent profile has wrong length");
  }
  std::vector<int> opp;
  opp.reserve(n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    if (others[j] < 0 || others[j] > max_bid) {
      throw InvalidArgument("opponent bid outside [0, max_bid]");
    }
    opp.push_back(j);
  }
  std::stable_sort(opp.begin(), opp.end(),
                   [&](int x, int y) { return others[x] < others[y]; });
  const int m = static_cast<int>(opp.size());

  // Opponent opp[k] is ahead of agent i exactly when i bids >= enter[k].
  std::vector<int> enter(m);
  for (int k = 0; k < m; ++k) enter[k] = others[opp[k]] + (opp[k] > i ? 1 : 0);

  std::vector<Rational> prefix_supply(m + 1), prefix_cost(m + 1);
  prefix_supply[0] = 0;
  prefix_cost[0] = 0;
  for (int k = 0; k < m; ++k) {
    prefix_supply[k + 1] = prefix_supply[k] + inst.supply(opp[k]);
    prefix_cost[k + 1] = prefix_cost[k] + inst.supply(opp[k]) * others[opp[k]];
  }

  const Rational& s_i = inst.supply(i);
  const int c_i = inst.cost(i);

  // When agent i sells its full supply, the pivot is the first opponent whose
  // cumulative supply plus s_i covers demand; this does not depend on how
  // many opponents precede i.
  int full_pivot = -1;
  for (int t = 0; t < m; ++t) {
    if (prefix_supply[t + 1] + s_i >= 1) {
      full_pivot = t;
      break;
    }
  }

  Rational without_i = 0;
  if (mech == Mechanism::VCG) {
    if (prefix_supply[m] >= 1) {
      for (int t = 0; t < m; ++t) {
        if (prefix_supply[t + 1] >= 1) {
          without_i = prefix_cost[t] + (1 - prefix_supply[t]) * others[opp[t]];
          break;
        }
      }
    } else {
      without_i = prefix_cost[m] + (1 - prefix_supply[m]) * max_bid;
    }
  }

  std::vector<UtilitySegment> segs;
  auto push = [&](int lo, int hi, Rational slope, Rational intercept) {
    if (!segs.empty() && segs.back().hi + 1 == lo &&
        segs.back().slope == slope && segs.back().intercept == intercept) {
      segs.back().hi = hi;
      return;
    }
    segs.push_back(UtilitySegment{lo, hi, std::move(slope), std::move(intercept)});
  };

  for (int k = 0; k <= m; ++k) {
    int lo = k == 0 ? 0 : enter[k - 1];
    int hi = k == m ? max_bid : std::min(enter[k] - 1, max_bid);
    if (lo > hi) continue;
    const Rational& ahead = prefix_supply[k];
    if (ahead >= 1) {
      push(lo, hi, Rational(0), Rational(0));
    } else if (ahead + s_i >= 1) {
      Rational x = 1 - ahead;
      if (mech == Mechanism::VCG) {
        push(lo, hi, Rational(0), without_i - prefix_cost[k] - x * c_i);
      } else {
        push(lo, hi, x, -x * c_i);
      }
    } else {
      if (full_pivot < 0) throw InfeasibleInstance("total supply < 1");
      switch (mech) {
        case Mechanism::PayAsClear:
          push(lo, hi, Rational(0), s_i * (others[opp[full_pivot]] - c_i));
          break;
        case Mechanism::PayAsBid:
          push(lo, hi, s_i, -s_i * c_i);
          break;
        case Mechanism::VCG: {
          Rational residual = 1 - s_i - prefix_supply[full_pivot];
          Rational others_cost =
              prefix_cost[full_pivot] + residual * others[opp[full_pivot]];
          push(lo, hi, Rational(0), without_i - others_cost - s_i * c_i);
          break;
        }
      }
    }
  }
  return segs;
}

/// Entry v is agent i's utility when bidding v against `others`.
inline std::vector<Rational> counterfactual_utilities(
    Mechanism mech, const MarketInstance& inst, const BidProfile& others,
    int i) {
  std::vector<Rational> out;
  out.reserve(inst.max_bid + 1);
  for (const auto& seg : utility_segments(mech, inst, others, i)) {
    for (int v = seg.lo; v <= seg.hi; ++v) out.push_back(seg.at(v));
  }
  return out;
}

/// Writes the largest utility over bids in [from, to] to *best; false if
/// no piece meets that range.
inline bool max_utility_in(const std::vector<UtilitySegment>& segs, int from,
                           int to, Rational* best) {
  bool found = false;
  for (const auto& seg : segs) {
    int lo = std::max(seg.lo, from);
    int hi = std::min(seg.hi, to);
    if (lo > hi) continue;
    Rational v = seg.slope >= 0 ? seg.at(hi) : seg.at(lo);
    if (!found || v > *best) {
      *best = v;
      found = true;
    }
  }
  return found;
}

inline Rational max_utility(const std::vector<UtilitySegment>& segs) {
  Rational best = 0;
  max_utility_in(segs, 0, segs.empty() ? -1 : segs.back().hi, &best);
  return best;
}

}  // namespace pbpc
