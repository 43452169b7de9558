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

// Pay-as-clear utility pieces in integer arithmetic: supplies are multiplied
// by the common denominator `unit`, so every utility becomes an integer
// multiple of 1/unit. Used by the hot loops of the b_high searches.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <type_traits>
#include <vector>

#include "pbpc/market.hpp"
#include "pbpc/rational.hpp"

namespace pbpc::detail {

template <typename Int>
struct ScaledSegment {
  int lo = 0;
  int hi = 0;
  Int slope = 0;      // unit * utility = slope * v + intercept
  Int intercept = 0;

  Int at(int v) const { return slope * Int(v) + intercept; }

  bool operator==(const ScaledSegment&) const = default;
};

template <typename Int>
class ScaledPcMarket {
 public:
  ScaledPcMarket(const MarketInstance& inst, const Integer& unit)
      : max_bid_(inst.max_bid) {
    unit_ = to_int(unit);
    for (int j = 0; j < inst.num_agents(); ++j) {
      Integer s = numerator_of(inst.supply(j)) *
                  (unit / denominator_of(inst.supply(j)));
      supply_.push_back(to_int(s));
      cost_.push_back(inst.cost(j));
    }
  }

  int num_agents() const { return static_cast<int>(supply_.size()); }

  /// Pieces of agent i's scaled utility against `others`, merged, covering
  /// [0, max_bid].
  void segments(const BidProfile& others, int i,
                std::vector<ScaledSegment<Int>>& out) {
    const int n = num_agents();
    opp_.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) opp_.push_back(j);
    }
    std::stable_sort(opp_.begin(), opp_.end(),
                     [&](int x, int y) { return others[x] < others[y]; });
    const int m = static_cast<int>(opp_.size());
    prefix_.resize(m + 1);
    prefix_[0] = 0;
    for (int k = 0; k < m; ++k) prefix_[k + 1] = prefix_[k] + supply_[opp_[k]];
    const Int s_i = supply_[i];
    const Int c_i = cost_[i];
    int pivot = -1;
    for (int t = 0; t < m; ++t) {
      if (prefix_[t + 1] + s_i >= unit_) {
        pivot = t;
        break;
      }
    }
    out.clear();
    auto push = [&](int lo, int hi, Int slope, Int intercept) {
      if (!out.empty() && out.back().hi + 1 == lo &&
          out.back().slope == slope && out.back().intercept == intercept) {
        out.back().hi = hi;
        return;
      }
      out.push_back(ScaledSegment<Int>{lo, hi, slope, intercept});
    };
    for (int k = 0; k <= m; ++k) {
      int lo = k == 0 ? 0 : others[opp_[k - 1]] + (opp_[k - 1] > i ? 1 : 0);
      int hi = k == m ? max_bid_
                      : std::min(others[opp_[k]] + (opp_[k] > i ? 1 : 0) - 1,
                                 max_bid_);
      if (lo > hi) continue;
      const Int& ahead = prefix_[k];
      if (ahead >= unit_) {
        push(lo, hi, Int(0), Int(0));
      } else if (ahead + s_i >= unit_) {
        Int x = unit_ - ahead;
        push(lo, hi, x, -(x * c_i));
      } else {
        push(lo, hi, Int(0), s_i * (Int(others[opp_[pivot]]) - c_i));
      }
    }
  }

 private:
  static Int to_int(const Integer& v) {
    if constexpr (std::is_same_v<Int, Integer>) {
      return v;
    } else {
      bool neg = v < 0;
      Integer a = neg ? Integer(-v) : v;
      unsigned __int128 lo = static_cast<std::uint64_t>(a & Integer(~std::uint64_t{0}));
      unsigned __int128 hi = static_cast<std::uint64_t>(a >> 64);
      Int r = static_cast<Int>((hi << 64) | lo);
      return neg ? -r : r;
    }
  }

  int max_bid_;
  Int unit_ = 1;
  std::vector<Int> supply_;
  std::vector<Int> cost_;
  std::vector<int> opp_;
  std::vector<Int> prefix_;
};

inline Integer common_supply_denominator(const MarketInstance& inst) {
  Integer unit = 1;
  for (const auto& p : inst.producers) {
    Integer d = denominator_of(p.supply);
    unit = unit / boost::multiprecision::gcd(unit, d) * d;
  }
  return unit;
}

/// True when every scaled quantity stays far inside 128-bit range.
inline bool fits_int128(const MarketInstance& inst, const Integer& unit) {
  Integer bound = unit * (inst.max_bid + 2) * (inst.num_agents() + 2) * 4;
  return boost::multiprecision::msb(bound) < 120;
}

template <typename Int>
Int scaled_max_in(const std::vector<ScaledSegment<Int>>& segs, int from,
                  int to, bool* found) {
  Int best = 0;
  *found = false;
  for (const auto& s : segs) {
    int lo = std::max(s.lo, from);
    int hi = std::min(s.hi, to);
    if (lo > hi) continue;
    Int v = s.slope >= 0 ? s.at(hi) : s.at(lo);
    if (!*found || v > best) {
      best = v;
      *found = true;
    }
  }
  return best;
}

template <typename Int>
int scaled_largest_best_response(const std::vector<ScaledSegment<Int>>& segs,
                                 int max_bid, int cost) {
  bool found = false;
  Int best = scaled_max_in(segs, 0, max_bid, &found);
  if (!found || best <= 0) return cost;
  for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
    if (it->slope >= 0) {
      if (it->at(it->hi) == best) return it->hi;
    } else {
      for (int v = it->hi; v >= it->lo; --v) {
        if (it->at(v) == best) return v;
      }
    }
  }
  return cost;
}

}  // namespace pbpc::detail
