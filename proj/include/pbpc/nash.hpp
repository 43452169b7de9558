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

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pbpc/errors.hpp"
#include "pbpc/market.hpp"
#include "pbpc/mechanism.hpp"
#include "pbpc/rational.hpp"

namespace pbpc {

struct Deviation {
  int agent = 0;
  int bid = 0;

  bool operator==(const Deviation&) const = default;
};

struct NeReport {
  bool is_equilibrium = false;
  // Largest gain any agent gets from a unilateral pure deviation.
  Rational epsilon;
  std::optional<Deviation> worst_deviator;
};

/// Exhaustive check of unilateral pure deviations.
inline NeReport is_pure_ne(Mechanism mech, const MarketInstance& inst,
                           const BidProfile& b,
                           const Rational& tolerance = Rational(0)) {
  require_valid(inst);
  check_profile(inst, b);
  NeReport report;
  report.epsilon = 0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    auto segs = utility_segments(mech, inst, b, i);
    Rational now;
    for (const auto& s : segs) {
      if (s.lo <= b[i] && b[i] <= s.hi) now = s.at(b[i]);
    }
    Rational best = now;
    max_utility_in(segs, 0, inst.max_bid, &best);
    if (best - now > report.epsilon) {
      report.epsilon = best - now;
      report.worst_deviator = Deviation{i, 0};
    }
  }
  // Lowest bid achieving the worst agent's best deviation.
  if (report.worst_deviator) {
    int i = report.worst_deviator->agent;
    auto u = counterfactual_utilities(mech, inst, b, i);
    Rational now = u[b[i]];
    for (int v = 0; v <= inst.max_bid; ++v) {
      if (u[v] - now == report.epsilon) {
        report.worst_deviator->bid = v;
        break;
      }
    }
  }
  report.is_equilibrium = report.epsilon <= tolerance;
  return report;
}

struct PureEnumerationOptions {
  std::uint64_t profile_budget = 10'000'000;
};

/// All pure equilibria (tolerance 0), in lexicographic profile order.
inline std::vector<BidProfile> enumerate_pure_ne(
    Mechanism mech, const MarketInstance& inst,
    const PureEnumerationOptions& opts = {}) {
  require_valid(inst);
  const int n = inst.num_agents();
  const int width = inst.max_bid + 1;
  double count = std::pow(static_cast<double>(width), n);
  if (count > static_cast<double>(opts.profile_budget)) {
    throw BudgetExceeded("pure enumeration needs " + std::to_string(width) +
                         "^" + std::to_string(n) + " profiles, budget is " +
                         std::to_string(opts.profile_budget));
  }
  std::vector<BidProfile> found;
  BidProfile b(n, 0);
  while (true) {
    bool stable = true;
    for (int i = 0; i < n && stable; ++i) {
      auto segs = utility_segments(mech, inst, b, i);
      Rational now;
      for (const auto& s : segs) {
        if (s.lo <= b[i] && b[i] <= s.hi) now = s.at(b[i]);
      }
      Rational best = now;
      max_utility_in(segs, 0, inst.max_bid, &best);
      if (best > now) stable = false;
    }
    if (stable) found.push_back(b);
    int pos = n - 1;
    while (pos >= 0 && b[pos] == inst.max_bid) b[pos--] = 0;
    if (pos < 0) break;
    ++b[pos];
  }
  return found;
}

// Per-agent distribution over bids; absent bids have probability 0.
using MixedStrategy = std::map<int, Rational>;
using MixedProfile = std::vector<MixedStrategy>;

inline MixedProfile point_mass(const BidProfile& b) {
  MixedProfile sigma(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) sigma[i][b[i]] = 1;
  return sigma;
}

inline void check_mixed_profile(const MarketInstance& inst,
                                const MixedProfile& sigma) {
  if (static_cast<int>(sigma.size()) != inst.num_agents()) {
    throw InvalidArgument("mixed profile has wrong number of agents");
  }
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    Rational total = 0;
    for (const auto& [bid, p] : sigma[i]) {
      if (bid < 0 || bid > inst.max_bid) {
        throw InvalidArgument("agent " + std::to_string(i) + ": bid " +
                              std::to_string(bid) + " outside [0, max_bid]");
      }
      if (p < 0) {
        throw InvalidArgument("agent " + std::to_string(i) +
                              ": negative probability");
      }
      total += p;
    }
    if (total != 1) {
      throw InvalidArgument("agent " + std::to_string(i) +
                            ": probabilities sum to " + to_string(total));
    }
  }
}

namespace detail {

struct WeightedProfile {
  BidProfile bids;
  Rational weight;
};

// Calls f(profile, probability) for every profile in the product of the
// supports, skipping agent `skip` (its entry stays 0).
template <typename F>
void for_each_support_profile(const MixedProfile& sigma, int skip, F&& f) {
  const int n = static_cast<int>(sigma.size());
  std::vector<std::vector<std::pair<int, Rational>>> supp(n);
  for (int i = 0; i < n; ++i) {
    if (i == skip) {
      supp[i].emplace_back(0, Rational(1));
      continue;
    }
    for (const auto& [bid, p] : sigma[i]) {
      if (p > 0) supp[i].emplace_back(bid, p);
    }
  }
  std::vector<std::size_t> idx(n, 0);
  BidProfile b(n);
  while (true) {
    Rational w = 1;
    for (int i = 0; i < n; ++i) {
      b[i] = supp[i][idx[i]].first;
      w *= supp[i][idx[i]].second;
    }
    f(b, w);
    int pos = n - 1;
    while (pos >= 0 && idx[pos] + 1 == supp[pos].size()) idx[pos--] = 0;
    if (pos < 0) return;
    ++idx[pos];
  }
}

inline double support_product(const MixedProfile& sigma, int skip) {
  double count = 1;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (static_cast<int>(i) == skip) continue;
    double k = 0;
    for (const auto& [bid, p] : sigma[i]) k += p > 0 ? 1 : 0;
    count *= k;
  }
  return count;
}

}  // namespace detail

struct MixedCheckOptions {
  // Cap on opponent support-product size per agent.
  std::uint64_t support_budget = 1'000'000;
};

/// Agent i's expected utility for every pure bid against sigma_{-i}.
inline std::vector<Rational> expected_counterfactual_utilities(
    Mechanism mech, const MarketInstance& inst, const MixedProfile& sigma,
    int i) {
  std::vector<Rational> eu(inst.max_bid + 1, Rational(0));
  detail::for_each_support_profile(
      sigma, i, [&](const BidProfile& b, const Rational& w) {
        for (const auto& s : utility_segments(mech, inst, b, i)) {
          for (int v = s.lo; v <= s.hi; ++v) eu[v] += w * s.at(v);
        }
      });
  return eu;
}

/// Exact check: no agent gains more than `tolerance` in expectation by
/// switching to any pure bid.
inline NeReport is_mixed_ne(Mechanism mech, const MarketInstance& inst,
                            const MixedProfile& sigma,
                            const Rational& tolerance = Rational(0),
                            const MixedCheckOptions& opts = {}) {
  require_valid(inst);
  check_mixed_profile(inst, sigma);
  NeReport report;
  report.epsilon = 0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    if (detail::support_product(sigma, i) >
        static_cast<double>(opts.support_budget)) {
      throw BudgetExceeded(
          "exact expectation over opponent supports exceeds budget; use the "
          "Monte Carlo estimate instead");
    }
  }
  for (int i = 0; i < inst.num_agents(); ++i) {
    auto eu = expected_counterfactual_utilities(mech, inst, sigma, i);
    Rational now = 0;
    for (const auto& [bid, p] : sigma[i]) now += p * eu[bid];
    for (int v = 0; v <= inst.max_bid; ++v) {
      Rational gain = eu[v] - now;
      if (gain > report.epsilon) {
        report.epsilon = gain;
        report.worst_deviator = Deviation{i, v};
      }
    }
  }
  report.is_equilibrium = report.epsilon <= tolerance;
  return report;
}

/// Expected unit price under independent mixing.
inline Rational expected_unit_price(Mechanism mech, const MarketInstance& inst,
                                    const MixedProfile& sigma,
                                    const MixedCheckOptions& opts = {}) {
  check_mixed_profile(inst, sigma);
  if (detail::support_product(sigma, -1) >
      static_cast<double>(opts.support_budget)) {
    throw BudgetExceeded("support product exceeds expectation budget");
  }
  Rational total = 0;
  detail::for_each_support_profile(
      sigma, -1, [&](const BidProfile& b, const Rational& w) {
        total += w * run_mechanism(mech, inst, b).unit_price;
      });
  return total;
}

/// Expected utility of every agent under sigma.
inline std::vector<Rational> expected_utilities(Mechanism mech,
                                                const MarketInstance& inst,
                                                const MixedProfile& sigma) {
  check_mixed_profile(inst, sigma);
  std::vector<Rational> out(inst.num_agents(), Rational(0));
  for (int i = 0; i < inst.num_agents(); ++i) {
    auto eu = expected_counterfactual_utilities(mech, inst, sigma, i);
    for (const auto& [bid, p] : sigma[i]) out[i] += p * eu[bid];
  }
  return out;
}

/// Per agent, the support bids at which it sells a positive quantity in at
/// least one profile of the support product.
inline std::vector<std::set<int>> selling_support(
    const MarketInstance& inst, const MixedProfile& sigma,
    const MixedCheckOptions& opts = {}) {
  check_mixed_profile(inst, sigma);
  if (detail::support_product(sigma, -1) >
      static_cast<double>(opts.support_budget)) {
    throw BudgetExceeded("support product exceeds expectation budget");
  }
  std::vector<std::set<int>> out(inst.num_agents());
  detail::for_each_support_profile(
      sigma, -1, [&](const BidProfile& b, const Rational&) {
        Allocation x = allocate(inst, b);
        for (int i = 0; i < inst.num_agents(); ++i) {
          if (x[i] > 0) out[i].insert(b[i]);
        }
      });
  return out;
}

/// True when no agent puts positive probability on a bid below its cost.
inline bool bids_at_least_cost(const MarketInstance& inst,
                               const MixedProfile& sigma) {
  for (int i = 0; i < static_cast<int>(sigma.size()); ++i) {
    for (const auto& [bid, p] : sigma[i]) {
      if (p > 0 && bid < inst.cost(i)) return false;
    }
  }
  return true;
}

// Floating-point mixed profile: per-agent dense probabilities over [0, M].
using FloatMixedProfile = std::vector<std::vector<double>>;

struct MonteCarloReport {
  double epsilon = 0;       // estimated largest deviation gain
  double half_width = 0;    // 95% confidence half-width for that agent
  int worst_agent = 0;
  int worst_bid = 0;
  std::uint64_t samples = 0;
};

/// Sampled estimate of the deviation gain, for profiles too large for the
/// exact check. Never used implicitly.
inline MonteCarloReport estimate_mixed_ne_monte_carlo(
    Mechanism mech, const MarketInstance& inst, const FloatMixedProfile& sigma,
    std::uint64_t samples, std::uint64_t seed) {
  require_valid(inst);
  const int n = inst.num_agents();
  const int width = inst.max_bid + 1;
  if (static_cast<int>(sigma.size()) != n) {
    throw InvalidArgument("mixed profile has wrong number of agents");
  }
  if (samples < 2) throw InvalidArgument("need at least two samples");
  std::vector<std::discrete_distribution<int>> dists;
  for (const auto& p : sigma) {
    if (static_cast<int>(p.size()) != width) {
      throw InvalidArgument("distribution must cover every bid 0..max_bid");
    }
    dists.emplace_back(p.begin(), p.end());
  }
  std::mt19937_64 rng(seed);
  MonteCarloReport best;
  best.samples = samples;
  best.epsilon = -1;
  for (int i = 0; i < n; ++i) {
    // Per-sample deviation-gain moments for every candidate bid.
    std::vector<double> sum(width, 0), sum_sq(width, 0);
    BidProfile b(n, 0);
    for (std::uint64_t t = 0; t < samples; ++t) {
      for (int j = 0; j < n; ++j) b[j] = dists[j](rng);
      auto segs = utility_segments(mech, inst, b, i);
      std::vector<double> u(width);
      for (const auto& s : segs) {
        double slope = to_double(s.slope), icpt = to_double(s.intercept);
        for (int v = s.lo; v <= s.hi; ++v) u[v] = slope * v + icpt;
      }
      double now = 0;
      for (int v = 0; v < width; ++v) now += sigma[i][v] * u[v];
      for (int v = 0; v < width; ++v) {
        double g = u[v] - now;
        sum[v] += g;
        sum_sq[v] += g * g;
      }
    }
    for (int v = 0; v < width; ++v) {
      double mean = sum[v] / samples;
      if (mean > best.epsilon) {
        double var = std::max(0.0, sum_sq[v] / samples - mean * mean);
        best.epsilon = mean;
        best.half_width = 1.96 * std::sqrt(var / (samples - 1));
        best.worst_agent = i;
        best.worst_bid = v;
      }
    }
  }
  return best;
}

}  // namespace pbpc
