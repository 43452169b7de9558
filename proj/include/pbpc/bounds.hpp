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

// Best responses under uniform (pay-as-clear) pricing and the derived bid
// bounds: the highest best response against near-truthful opponents, the
// lowest full-supply price matching the truthful best utility, and the
// equilibrium price bounds built from them.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbpc/detail/scaled_pc.hpp"
#include "pbpc/errors.hpp"
#include "pbpc/market.hpp"
#include "pbpc/mechanism.hpp"
#include "pbpc/nash.hpp"
#include "pbpc/rational.hpp"

namespace pbpc {

/// Bids maximizing agent i's pay-as-clear utility against `others`; if the
/// best utility is not positive the answer is {cost of i}.
inline std::vector<int> best_response_set(const MarketInstance& inst, int i,
                                          const BidProfile& others) {
  auto segs = utility_segments(Mechanism::PayAsClear, inst, others, i);
  Rational best = max_utility(segs);
  if (best <= 0) return {inst.cost(i)};
  std::vector<int> out;
  for (const auto& seg : segs) {
    if (seg.slope == 0) {
      if (seg.intercept == best) {
        for (int v = seg.lo; v <= seg.hi; ++v) out.push_back(v);
      }
      continue;
    }
    for (int v = seg.lo; v <= seg.hi; ++v) {
      if (seg.at(v) == best) out.push_back(v);
    }
  }
  return out;
}

namespace detail {

// Largest element of the best response set, read off the segments.
inline int largest_best_response(const std::vector<UtilitySegment>& segs,
                                 int cost) {
  Rational best = max_utility(segs);
  if (best <= 0) return cost;
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

inline BidProfile perturbed_truthful(const MarketInstance& inst,
                                     const std::vector<int>& delta) {
  BidProfile b(inst.producers.size());
  for (int j = 0; j < inst.num_agents(); ++j) {
    b[j] = std::min(inst.cost(j) + delta[j], inst.max_bid);
  }
  return b;
}

}  // namespace detail

enum class BHighMethod { kAuto, kExhaustive, kBranchAndBound };

struct BHighOptions {
  BHighMethod method = BHighMethod::kAuto;
  // Hard cap for the exhaustive enumeration.
  int max_exhaustive_agents = 20;
  // kAuto enumerates exhaustively up to this many agents and prunes beyond.
  int auto_exhaustive_agents = 10;
  // Node limit for the pruned search.
  std::uint64_t node_budget = 20'000'000;
};

struct BHighResult {
  int value = 0;
  // Per-agent 0/1 raise over cost that attains `value` (entry i is 0); the
  // lexicographically smallest such vector.
  std::vector<int> perturbation;
  std::uint64_t evaluations = 0;
};

namespace detail {

template <typename Int>
BHighResult b_high_exhaustive_impl(const MarketInstance& inst, int i,
                                   const Integer& unit) {
  const int n = inst.num_agents();
  ScaledPcMarket<Int> market(inst, unit);
  std::vector<ScaledSegment<Int>> segs;
  std::vector<int> opp;
  for (int j = 0; j < n; ++j) {
    if (j != i) opp.push_back(j);
  }
  const int m = static_cast<int>(opp.size());
  BHighResult result;
  result.value = -1;
  std::vector<int> delta(n, 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    for (int p = 0; p < m; ++p) delta[opp[p]] = (mask >> (m - 1 - p)) & 1;
    market.segments(perturbed_truthful(inst, delta), i, segs);
    int top = scaled_largest_best_response(segs, inst.max_bid, inst.cost(i));
    ++result.evaluations;
    if (top > result.value) {
      result.value = top;
      result.perturbation = delta;
    }
  }
  return result;
}

// Depth-first search over opponent perturbations in index order, asking
// whether some completion puts the largest best response at or above
// `target`. For bids at or above cost, pay-as-clear utility is nondecreasing
// in every opponent bid, so raising all undecided opponents bounds utility
// from above and leaving them at cost bounds it from below. The largest best
// response only depends on utilities at bids >= cost.
template <typename Int>
class BHighSearch {
 public:
  using Segments = std::vector<ScaledSegment<Int>>;

  BHighSearch(const MarketInstance& inst, int agent, const Integer& unit,
              std::uint64_t budget)
      : inst_(inst), market_(inst, unit), agent_(agent), budget_(budget) {
    for (int j = 0; j < inst.num_agents(); ++j) {
      if (j != agent) opp_.push_back(j);
    }
    delta_.assign(inst.num_agents(), 0);
    evaluate(0, &root_lo_, &root_hi_);
  }

  /// Root-level bounds only; cheap filter before a full search.
  bool may_reach(int target) const {
    bool found = false;
    Int upper = scaled_max_in(root_hi_, target, inst_.max_bid, &found);
    if (!found || upper <= 0) return false;
    Int lower = scaled_max_in(root_lo_, inst_.cost(agent_), inst_.max_bid,
                              &found);
    return !(found && upper < lower);
  }

  bool feasible(int target) {
    target_ = target;
    std::fill(delta_.begin(), delta_.end(), 0);
    return descend(0);
  }

  const std::vector<int>& witness() const { return delta_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  void evaluate(std::size_t pos, Segments* lo, Segments* hi) {
    scratch_ = delta_;
    for (std::size_t p = pos; p < opp_.size(); ++p) scratch_[opp_[p]] = 0;
    market_.segments(perturbed_truthful(inst_, scratch_), agent_, *lo);
    if (hi == nullptr) return;
    for (std::size_t p = pos; p < opp_.size(); ++p) scratch_[opp_[p]] = 1;
    market_.segments(perturbed_truthful(inst_, scratch_), agent_, *hi);
  }

  static bool same_from(const Segments& a, const Segments& b, int from) {
    auto ia = std::find_if(a.begin(), a.end(),
                           [&](const auto& s) { return s.hi >= from; });
    auto ib = std::find_if(b.begin(), b.end(),
                           [&](const auto& s) { return s.hi >= from; });
    if (a.end() - ia != b.end() - ib) return false;
    for (; ia != a.end(); ++ia, ++ib) {
      if (std::max(ia->lo, from) != std::max(ib->lo, from) || ia->hi != ib->hi ||
          ia->slope != ib->slope || ia->intercept != ib->intercept) {
        return false;
      }
    }
    return true;
  }

  bool leaf_ok(const Segments& segs) const {
    return scaled_largest_best_response(segs, inst_.max_bid,
                                        inst_.cost(agent_)) >= target_;
  }

  bool descend(std::size_t pos) {
    if (++nodes_ > budget_) {
      throw BudgetExceeded("perturbation search exceeded " +
                           std::to_string(budget_) + " nodes");
    }
    const int cost = inst_.cost(agent_);
    Segments lo, hi;
    if (pos == 0) {
      lo = root_lo_;
      hi = root_hi_;
    } else {
      evaluate(pos, &lo, pos == opp_.size() ? nullptr : &hi);
    }
    if (pos == opp_.size()) return leaf_ok(lo);

    bool found = false;
    Int upper = scaled_max_in(hi, target_, inst_.max_bid, &found);
    if (!found || upper <= 0) return false;
    Int lower = scaled_max_in(lo, cost, inst_.max_bid, &found);
    if (found && upper < lower) return false;
    if (same_from(lo, hi, cost)) return leaf_ok(lo);

    int j = opp_[pos];
    delta_[j] = 0;
    if (descend(pos + 1)) return true;
    if (inst_.cost(j) < inst_.max_bid) {
      delta_[j] = 1;
      if (descend(pos + 1)) return true;
    }
    delta_[j] = 0;
    return false;
  }

  const MarketInstance& inst_;
  ScaledPcMarket<Int> market_;
  int agent_;
  std::uint64_t budget_;
  std::vector<int> opp_;
  std::vector<int> delta_;
  std::vector<int> scratch_;
  Segments root_lo_, root_hi_;
  int target_ = 0;
  std::uint64_t nodes_ = 0;
};

// The largest best response is always the right end of a utility piece, so
// it is max_bid or within one of some opponent's cost; test those values from
// the top down.
template <typename Int>
BHighResult b_high_pruned_impl(const MarketInstance& inst, int i,
                               const Integer& unit, std::uint64_t budget) {
  const int n = inst.num_agents();
  const int cost = inst.cost(i);
  std::vector<int> candidates = {inst.max_bid};
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    for (int d = -1; d <= 1; ++d) candidates.push_back(inst.cost(j) + d);
  }
  std::sort(candidates.begin(), candidates.end(), std::greater<int>());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  BHighSearch<Int> search(inst, i, unit, budget);
  BHighResult result;
  for (int target : candidates) {
    if (target <= cost || target > inst.max_bid) continue;
    if (!search.may_reach(target)) continue;
    if (search.feasible(target)) {
      result.value = target;
      result.perturbation = search.witness();
      result.evaluations = search.nodes();
      return result;
    }
  }
  result.value = cost;
  result.perturbation.assign(n, 0);
  result.evaluations = search.nodes();
  return result;
}

}  // namespace detail

/// Enumerates all 2^(n-1) perturbations of the opponents' costs.
inline BHighResult b_high_exhaustive(const MarketInstance& inst, int i,
                                     int max_agents = 20) {
  require_valid(inst);
  const int n = inst.num_agents();
  if (i < 0 || i >= n) throw InvalidArgument("agent index out of range");
  if (n > max_agents || n > 62) {
    throw BudgetExceeded("exhaustive perturbation search limited to " +
                         std::to_string(std::min(max_agents, 62)) +
                         " agents; instance has " + std::to_string(n));
  }
  Integer unit = detail::common_supply_denominator(inst);
  if (detail::fits_int128(inst, unit)) {
    return detail::b_high_exhaustive_impl<__int128>(inst, i, unit);
  }
  return detail::b_high_exhaustive_impl<Integer>(inst, i, unit);
}

/// Same value and witness as the exhaustive search, with exact pruning.
inline BHighResult b_high_pruned(const MarketInstance& inst, int i,
                                 std::uint64_t node_budget = 20'000'000) {
  require_valid(inst);
  if (i < 0 || i >= inst.num_agents()) {
    throw InvalidArgument("agent index out of range");
  }
  Integer unit = detail::common_supply_denominator(inst);
  if (detail::fits_int128(inst, unit)) {
    return detail::b_high_pruned_impl<__int128>(inst, i, unit, node_budget);
  }
  return detail::b_high_pruned_impl<Integer>(inst, i, unit, node_budget);
}

inline BHighResult b_high_search(const MarketInstance& inst, int i,
                                 const BHighOptions& opts = {}) {
  switch (opts.method) {
    case BHighMethod::kExhaustive:
      return b_high_exhaustive(inst, i, opts.max_exhaustive_agents);
    case BHighMethod::kBranchAndBound:
      return b_high_pruned(inst, i, opts.node_budget);
    case BHighMethod::kAuto:
      break;
  }
  if (inst.num_agents() <=
      std::min(opts.auto_exhaustive_agents, opts.max_exhaustive_agents)) {
    return b_high_exhaustive(inst, i, opts.max_exhaustive_agents);
  }
  return b_high_pruned(inst, i, opts.node_budget);
}

/// Highest best-response bid of agent i over all opponent profiles that bid
/// cost or cost + 1 (capped at max_bid).
inline int b_high(const MarketInstance& inst, int i,
                  const BHighOptions& opts = {}) {
  return b_high_search(inst, i, opts).value;
}

/// Best pay-as-clear utility of agent i against truthful opponents.
inline Rational truthful_best_utility(const MarketInstance& inst, int i) {
  return max_utility(
      utility_segments(Mechanism::PayAsClear, inst, truthful_profile(inst), i));
}

/// Price at which selling the full supply earns the truthful best utility,
/// before rounding up.
inline Rational b_low_exact(const MarketInstance& inst, int i) {
  if (i < 0 || i >= inst.num_agents()) {
    throw InvalidArgument("agent index out of range");
  }
  return inst.cost(i) + truthful_best_utility(inst, i) / inst.supply(i);
}

/// Smallest integer price at which selling the full supply earns the
/// truthful best utility.
inline int b_low(const MarketInstance& inst, int i) {
  return static_cast<int>(ceil_to_integer(b_low_exact(inst, i)));
}

/// Agents up to and including the truthful pivotal agent, in merit order.
inline std::vector<int> eligible_agents(const MarketInstance& inst) {
  BidProfile c = truthful_profile(inst);
  std::vector<int> order = merit_order(c);
  std::size_t pivot = pivot_position(inst, order);
  return std::vector<int>(order.begin(), order.begin() + pivot + 1);
}

struct BoundsOptions {
  BHighOptions b_high;
  // Skip the b_high search for agents outside the eligible set (their entry
  // is reported as -1).
  bool eligible_only = false;
};

struct BoundsReport {
  std::vector<int> b_high;
  std::vector<int> b_low;
  std::vector<std::vector<int>> b_high_witness;
  std::vector<int> eligible;
  int truthful_pivot = 0;
  int pc_floor = 0;
  // pc_floor before rounding up; the bound that holds for expected prices of
  // mixed equilibria.
  Rational pc_floor_exact;
  int pc_pure_price = 0;
  int pb_interval_lo = 0;
  int pb_interval_hi = 0;
  std::optional<Rational> refined_pb_bound;
  BidProfile pc_pure_ne;
  // Whether pc_pure_ne clears at pc_pure_price and passed the exact
  // pay-as-clear equilibrium check.
  bool pc_pure_ne_verified = false;
};

namespace detail {

inline std::optional<Rational> refined_bound_from(const MarketInstance& inst,
                                                  const std::vector<int>& hi,
                                                  const std::vector<int>& lo,
                                                  const std::vector<int>& elig) {
  int star = elig.front();
  for (int j : elig) {
    if (lo[j] > lo[star]) star = j;
  }
  const Rational& s = inst.supply(star);
  const int c = inst.cost(star);
  if (s >= 1) return std::nullopt;
  if (!(lo[star] + 1 < hi[star])) return std::nullopt;
  for (int j = 0; j < inst.num_agents(); ++j) {
    if (j != star && lo[j] > lo[star] - 2) return std::nullopt;
  }
  Rational gamma = truthful_best_utility(inst, star) / s + 1;
  Rational tail = 0;
  for (int a = lo[star] + 2; a <= hi[star]; ++a) {
    tail += Rational(Integer(1), Integer(a - c - 1));
  }
  return (1 - s) * (lo[star] + 1 + gamma * tail) + s * hi[star];
}

}  // namespace detail

namespace detail {

// Searches profiles where `star` bids `price` and every other agent bids
// its cost, its cost + 1, 0, `price` or `price` + 1, for a pay-as-clear
// equilibrium clearing at `price`. Bids below cost matter: a seller paid the
// clearing price can profit from one, and a bid that loses the tie at
// `price` sells nothing. Gives up past `budget` profiles.
inline std::optional<BidProfile> equilibrium_witness(const MarketInstance& inst,
                                                     int star, int price,
                                                     double budget = 200'000) {
  const int n = inst.num_agents();
  std::vector<std::vector<int>> choices(n);
  double profiles = 1;
  for (int j = 0; j < n; ++j) {
    if (j == star) {
      choices[j] = {price};
      continue;
    }
    for (int v : {inst.cost(j), inst.cost(j) + 1, 0, price, price + 1}) {
      v = std::min(v, inst.max_bid);
      if (std::find(choices[j].begin(), choices[j].end(), v) == choices[j].end()) {
        choices[j].push_back(v);
      }
    }
    profiles *= static_cast<double>(choices[j].size());
  }
  if (profiles > budget) return std::nullopt;
  std::vector<std::size_t> idx(n, 0);
  BidProfile b(n);
  while (true) {
    for (int j = 0; j < n; ++j) b[j] = choices[j][idx[j]];
    if (clearing_price(inst, b) == price &&
        is_pure_ne(Mechanism::PayAsClear, inst, b).is_equilibrium) {
      return b;
    }
    int pos = n - 1;
    while (pos >= 0 && idx[pos] + 1 == choices[pos].size()) idx[pos--] = 0;
    if (pos < 0) return std::nullopt;
    ++idx[pos];
  }
}

}  // namespace detail

inline BoundsReport bounds_summary(const MarketInstance& inst,
                                   const BoundsOptions& opts = {}) {
  require_valid(inst);
  const int n = inst.num_agents();
  BoundsReport r;
  r.eligible = eligible_agents(inst);
  r.truthful_pivot = r.eligible.back();
  std::vector<bool> is_eligible(n, false);
  for (int j : r.eligible) is_eligible[j] = true;
  r.b_high.assign(n, -1);
  r.b_high_witness.assign(n, {});
  r.b_low.resize(n);
  std::vector<Rational> low_exact(n);
  for (int i = 0; i < n; ++i) {
    low_exact[i] = b_low_exact(inst, i);
    r.b_low[i] = static_cast<int>(ceil_to_integer(low_exact[i]));
    if (opts.eligible_only && !is_eligible[i]) continue;
    BHighResult h = b_high_search(inst, i, opts.b_high);
    r.b_high[i] = h.value;
    r.b_high_witness[i] = std::move(h.perturbation);
  }
  int star = r.eligible.front();
  r.pc_floor = r.b_low[star];
  r.pc_pure_price = r.b_high[star];
  r.pc_floor_exact = low_exact[star];
  for (int j : r.eligible) {
    r.pc_floor = std::max(r.pc_floor, r.b_low[j]);
    r.pc_floor_exact = std::max(r.pc_floor_exact, low_exact[j]);
    // Ties go to the highest index.
    if (r.b_high[j] > r.pc_pure_price ||
        (r.b_high[j] == r.pc_pure_price && j > star)) {
      star = j;
      r.pc_pure_price = r.b_high[j];
    }
  }
  r.pb_interval_lo = std::max(0, r.pc_floor - 1);
  r.pb_interval_hi = r.pc_pure_price;
  // Needs b_high only for an eligible agent, so eligible_only is enough.
  r.refined_pb_bound =
      detail::refined_bound_from(inst, r.b_high, r.b_low, r.eligible);
  r.pc_pure_ne = detail::perturbed_truthful(inst, r.b_high_witness[star]);
  r.pc_pure_ne[star] = r.pc_pure_price;
  r.pc_pure_ne_verified =
      clearing_price(inst, r.pc_pure_ne) == r.pc_pure_price &&
      is_pure_ne(Mechanism::PayAsClear, inst, r.pc_pure_ne).is_equilibrium;
  if (!r.pc_pure_ne_verified) {
    // The first witness can leave an agent outside the eligible set free to
    // undercut at a profit, or hand the pivot to a costlier agent.
    for (auto it = r.eligible.rbegin(); it != r.eligible.rend(); ++it) {
      if (r.b_high[*it] != r.pc_pure_price) continue;
      if (auto b = detail::equilibrium_witness(inst, *it, r.pc_pure_price)) {
        r.pc_pure_ne = std::move(*b);
        r.pc_pure_ne_verified = true;
        break;
      }
    }
  }
  return r;
}

/// Pure equilibrium of pay-as-clear: the eligible agent with the largest
/// b_high (highest index on ties) bids it, the others bid the perturbed
/// costs that make it a best response. If that profile is not an equilibrium
/// a wider search is run; bounds_summary reports whether the returned
/// profile verified. Some instances have no pure equilibrium at this price.
inline BidProfile construct_pc_pure_ne(const MarketInstance& inst,
                                       const BHighOptions& opts = {}) {
  BoundsOptions bo;
  bo.b_high = opts;
  bo.eligible_only = true;
  return bounds_summary(inst, bo).pc_pure_ne;
}

/// Upper bound on the worst pay-as-bid equilibrium unit price for instances
/// with a single dominant b_low agent; nullopt when that shape is absent.
inline std::optional<Rational> refined_pb_upper_bound(
    const MarketInstance& inst, const BHighOptions& opts = {}) {
  BoundsOptions bo;
  bo.b_high = opts;
  bo.eligible_only = true;
  return bounds_summary(inst, bo).refined_pb_bound;
}

struct Manipulation {
  int agent = 0;
  int bid = 0;
  Rational gain;
};

/// A profitable unilateral pay-as-clear deviation from truthful bidding. When
/// the truthful pivot is strictly cheaper than the next agent in merit order,
/// the pivot's most profitable raise (lowest bid on ties) is reported;
/// otherwise the most profitable deviation over all agents and bids.
inline std::optional<Manipulation> truthful_manipulability(
    const MarketInstance& inst) {
  require_valid(inst);
  BidProfile c = truthful_profile(inst);
  std::vector<int> order = merit_order(c);
  std::size_t pivot_pos = pivot_position(inst, order);
  int pivot = order[pivot_pos];

  auto best_for = [&](int i) -> std::optional<Manipulation> {
    auto u = counterfactual_utilities(Mechanism::PayAsClear, inst, c, i);
    const Rational& now = u[inst.cost(i)];
    std::optional<Manipulation> best;
    for (int v = 0; v <= inst.max_bid; ++v) {
      Rational gain = u[v] - now;
      if (gain > 0 && (!best || gain > best->gain)) {
        best = Manipulation{i, v, gain};
      }
    }
    return best;
  };

  if (pivot_pos + 1 < order.size() &&
      inst.cost(pivot) < inst.cost(order[pivot_pos + 1])) {
    if (auto m = best_for(pivot)) return m;
  }
  std::optional<Manipulation> best;
  for (int i = 0; i < inst.num_agents(); ++i) {
    auto m = best_for(i);
    if (m && (!best || m->gain > best->gain)) best = m;
  }
  return best;
}

}  // namespace pbpc
