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

// All extreme mixed equilibria of a two-producer market, found by
// enumerating the vertices of both best-response polyhedra with exact
// integer linear algebra and pairing the completely labelled ones. Handles
// degenerate games, where supports of different sizes occur.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "pbpc/detail/exact_solve.hpp"
#include "pbpc/errors.hpp"
#include "pbpc/market.hpp"
#include "pbpc/mechanism.hpp"
#include "pbpc/nash.hpp"
#include "pbpc/rational.hpp"

namespace pbpc {

struct BimatrixOptions {
  // Largest support size considered for either player (0: no cap).
  int max_support = 0;
  // Cap on the number of linear systems solved per player.
  std::uint64_t system_budget = 5'000'000;
  // Re-check every result with the exact mixed-equilibrium test.
  bool verify = true;
};

namespace detail {

using IntMatrix = std::vector<std::vector<std::int64_t>>;

// Payoff to agent `who` for every (row bid, column bid) pair, where rows are
// agent 0's bids and columns agent 1's.
inline std::vector<std::vector<Rational>> payoff_matrix(
    Mechanism mech, const MarketInstance& inst, int who) {
  const int w = inst.max_bid + 1;
  std::vector<std::vector<Rational>> out(w, std::vector<Rational>(w));
  BidProfile b(2, 0);
  for (int other = 0; other < w; ++other) {
    b[1 - who] = other;
    auto u = counterfactual_utilities(mech, inst, b, who);
    for (int own = 0; own < w; ++own) {
      if (who == 0) {
        out[own][other] = u[own];
      } else {
        out[other][own] = u[own];
      }
    }
  }
  return out;
}

inline IntMatrix scale_to_integers(
    const std::vector<std::vector<Rational>>& m) {
  Integer lcm = 1;
  for (const auto& row : m) {
    for (const auto& x : row) {
      Integer d = denominator_of(x);
      lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
    }
  }
  IntMatrix out(m.size(), std::vector<std::int64_t>(m.front().size()));
  const Integer limit = Integer(std::numeric_limits<std::int64_t>::max() / 4);
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      Integer v = numerator_of(m[r][c]) * (lcm / denominator_of(m[r][c]));
      if (v > limit || v < -limit) {
        throw InvalidArgument("payoffs too large for exact bimatrix solving");
      }
      out[r][c] = static_cast<std::int64_t>(v);
    }
  }
  return out;
}

struct PolyVertex {
  std::vector<Rational> prob;  // over own strategies
  std::vector<bool> tight;     // opponent strategies that are best responses

  bool operator<(const PolyVertex& o) const { return prob < o.prob; }
};

// Vertices of {q >= 0, sum q = 1, G q <= u}: G[t][v] is the payoff of the
// opponent's strategy t when this player plays v.
inline std::vector<PolyVertex> polyhedron_vertices(const IntMatrix& g,
                                                   const BimatrixOptions& opts) {
  const int num_t = static_cast<int>(g.size());
  const int num_v = static_cast<int>(g.front().size());
  int cap = std::min(num_t, num_v);
  if (opts.max_support > 0) cap = std::min(cap, opts.max_support);
  std::set<PolyVertex> found;
  std::uint64_t systems = 0;

  std::vector<int> supp, tight_set;
  auto solve_one = [&]() {
    if (++systems > opts.system_budget) {
      throw BudgetExceeded("bimatrix vertex enumeration exceeded " +
                           std::to_string(opts.system_budget) + " systems");
    }
    const int s = static_cast<int>(supp.size());
    IntMatrix a(s + 1, std::vector<std::int64_t>(s + 2, 0));
    for (int k = 0; k < s; ++k) a[0][k] = 1;
    a[0][s + 1] = 1;
    for (int r = 0; r < s; ++r) {
      for (int k = 0; k < s; ++k) a[r + 1][k] = g[tight_set[r]][supp[k]];
      a[r + 1][s] = -1;
    }
    auto sol = solve_integer_system(a);
    if (!sol) return;
    for (int k = 0; k < s; ++k) {
      if (sol->numer[k] < 0) return;
    }
    const Integer& u = sol->numer[s];
    std::vector<bool> tight(num_t, false);
    for (int t = 0; t < num_t; ++t) {
      Integer lhs = 0;
      for (int k = 0; k < s; ++k) lhs += g[t][supp[k]] * sol->numer[k];
      if (lhs > u) return;
      tight[t] = lhs == u;
    }
    PolyVertex vx;
    vx.prob.assign(num_v, Rational(0));
    for (int k = 0; k < s; ++k) {
      vx.prob[supp[k]] = Rational(sol->numer[k], sol->denom);
    }
    vx.tight = std::move(tight);
    found.insert(std::move(vx));
  };

  // Choose `want` indices from [0, limit) in lexicographic order.
  auto for_each_subset = [](int limit, int want, std::vector<int>& pick,
                            auto&& body) {
    pick.resize(want);
    for (int k = 0; k < want; ++k) pick[k] = k;
    while (true) {
      body();
      int pos = want - 1;
      while (pos >= 0 && pick[pos] == limit - want + pos) --pos;
      if (pos < 0) return;
      ++pick[pos];
      for (int k = pos + 1; k < want; ++k) pick[k] = pick[k - 1] + 1;
    }
  };

  for (int s = 1; s <= cap; ++s) {
    for_each_subset(num_v, s, supp, [&]() {
      for_each_subset(num_t, s, tight_set, solve_one);
    });
  }
  return std::vector<PolyVertex>(found.begin(), found.end());
}

inline MixedStrategy to_strategy(const std::vector<Rational>& prob) {
  MixedStrategy s;
  for (std::size_t v = 0; v < prob.size(); ++v) {
    if (prob[v] > 0) s[static_cast<int>(v)] = prob[v];
  }
  return s;
}

}  // namespace detail

/// Extreme mixed equilibria of a two-agent market (every equilibrium is a
/// convex combination of these within a product of faces), ordered by the
/// first agent's then the second agent's probability vector.
inline std::vector<MixedProfile> enumerate_mixed_ne_2p(
    Mechanism mech, const MarketInstance& inst,
    const BimatrixOptions& opts = {}) {
  require_valid(inst);
  if (inst.num_agents() != 2) {
    throw InvalidArgument("two-player enumeration needs exactly 2 agents, got " +
                          std::to_string(inst.num_agents()));
  }
  const int w = inst.max_bid + 1;
  detail::IntMatrix a = detail::scale_to_integers(detail::payoff_matrix(mech, inst, 0));
  detail::IntMatrix b = detail::scale_to_integers(detail::payoff_matrix(mech, inst, 1));
  detail::IntMatrix bt(w, std::vector<std::int64_t>(w));
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c < w; ++c) bt[c][r] = b[r][c];
  }
  // Row player's mixtures constrain the column player's payoffs, and the
  // other way around.
  auto xs = detail::polyhedron_vertices(bt, opts);
  auto ys = detail::polyhedron_vertices(a, opts);

  std::vector<MixedProfile> out;
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      bool ok = true;
      for (int r = 0; r < w && ok; ++r) ok = x.prob[r] == 0 || y.tight[r];
      for (int c = 0; c < w && ok; ++c) ok = y.prob[c] == 0 || x.tight[c];
      if (!ok) continue;
      out.push_back({detail::to_strategy(x.prob), detail::to_strategy(y.prob)});
    }
  }
  if (opts.verify) {
    for (const auto& sigma : out) {
      if (!is_mixed_ne(mech, inst, sigma, Rational(0)).is_equilibrium) {
        throw std::logic_error("bimatrix enumeration produced a non-equilibrium");
      }
    }
  }
  return out;
}

}  // namespace pbpc
