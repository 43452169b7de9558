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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "pbpc/bimatrix.hpp"
#include "pbpc/bounds.hpp"
#include "pbpc/detail/exact_solve.hpp"
#include "pbpc/harness/builtins.hpp"
#include "pbpc/nash.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

namespace pbpc {
namespace {

using harness::gen_builtin;

// Brute-force pure check straight from the definition.
bool naive_pure_ne(Mechanism m, const MarketInstance& inst, const BidProfile& b) {
  for (int i = 0; i < inst.num_agents(); ++i) {
    Rational now = testing::naive_utility(m, inst, b, i);
    BidProfile probe = b;
    for (int v = 0; v <= inst.max_bid; ++v) {
      probe[i] = v;
      if (testing::naive_utility(m, inst, probe, i) > now) return false;
    }
  }
  return true;
}

TEST(PureNash, NoPayAsBidEquilibriumOnTwoLargeSellers) {
  for (int m : {5, 8}) {
    MarketInstance inst = harness::gen_cor_pb(m);
    EXPECT_TRUE(enumerate_pure_ne(Mechanism::PayAsBid, inst).empty());
    auto pc = enumerate_pure_ne(Mechanism::PayAsClear, inst);
    EXPECT_FALSE(pc.empty());
    for (const auto& b : pc) EXPECT_TRUE(naive_pure_ne(Mechanism::PayAsClear, inst, b));
  }
  EXPECT_EQ(enumerate_pure_ne(Mechanism::PayAsClear, gen_builtin("cor-pb")).size(), 4u);
}

TEST(PureNash, EnumerationMatchesBruteForce) {
  std::mt19937_64 rng(30);
  testing::RandomInstanceSpec spec;
  spec.max_agents = 3;
  spec.max_max_bid = 5;
  for (int t = 0; t < 60; ++t) {
    MarketInstance inst = testing::random_instance(rng, spec);
    for (Mechanism m : kAllMechanisms) {
      std::vector<BidProfile> expect;
      BidProfile b(inst.num_agents(), 0);
      while (true) {
        if (naive_pure_ne(m, inst, b)) expect.push_back(b);
        int pos = inst.num_agents() - 1;
        while (pos >= 0 && b[pos] == inst.max_bid) b[pos--] = 0;
        if (pos < 0) break;
        ++b[pos];
      }
      EXPECT_EQ(enumerate_pure_ne(m, inst), expect) << to_string(m);
    }
  }
}

TEST(PureNash, BestPayAsClearFamilyProfile) {
  for (int delta : {1, 3, 300}) {
    MarketInstance inst = harness::gen_bestpc_family(delta);
    BidProfile b{delta, 0, delta};
    EXPECT_TRUE(is_pure_ne(Mechanism::PayAsClear, inst, b).is_equilibrium);
  }
}

TEST(PureNash, WorstDeviationReport) {
  MarketInstance inst = gen_builtin("example1");
  NeReport r = is_pure_ne(Mechanism::PayAsClear, inst, truthful_profile(inst));
  EXPECT_FALSE(r.is_equilibrium);
  ASSERT_TRUE(r.worst_deviator.has_value());
  // Seller 1 raising to 3 becomes pivotal: 5/12 at 3 beats 1/2 at 2 by 1/3.
  EXPECT_EQ(*r.worst_deviator, (Deviation{1, 3}));
  EXPECT_EQ(r.epsilon, make_rational(1, 3));
  EXPECT_TRUE(is_pure_ne(Mechanism::PayAsClear, inst, truthful_profile(inst),
                         make_rational(1, 3))
                  .is_equilibrium);
}

TEST(PureNash, BudgetIsEnforced) {
  PureEnumerationOptions o;
  o.profile_budget = 10;
  EXPECT_THROW(enumerate_pure_ne(Mechanism::PayAsBid, gen_builtin("cor-pb"), o),
               BudgetExceeded);
}

TEST(MixedNash, PointMassAgreesWithPureCheck) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    MarketInstance inst = testing::random_instance(rng);
    BidProfile b = testing::random_profile(rng, inst);
    for (Mechanism m : kAllMechanisms) {
      NeReport a = is_pure_ne(m, inst, b);
      NeReport c = is_mixed_ne(m, inst, point_mass(b));
      EXPECT_EQ(a.is_equilibrium, c.is_equilibrium);
      EXPECT_EQ(a.epsilon, c.epsilon);
      EXPECT_EQ(expected_unit_price(m, inst, point_mass(b)),
                run_mechanism(m, inst, b).unit_price);
    }
  }
}

TEST(MixedNash, RejectsMalformedProfiles) {
  MarketInstance inst = gen_builtin("cor-pb");
  MixedProfile bad_sum{{{1, make_rational(1, 2)}}, {{1, Rational(1)}}};
  EXPECT_THROW(is_mixed_ne(Mechanism::PayAsBid, inst, bad_sum), InvalidArgument);
  MixedProfile bad_bid{{{9, Rational(1)}}, {{1, Rational(1)}}};
  EXPECT_THROW(is_mixed_ne(Mechanism::PayAsBid, inst, bad_bid), InvalidArgument);
  MixedProfile short_profile{{{1, Rational(1)}}};
  EXPECT_THROW(is_mixed_ne(Mechanism::PayAsBid, inst, short_profile),
               InvalidArgument);
}

TEST(ExactSolve, MatchesRationalElimination) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> entry(-30, 30);
  int solved = 0;
  for (int t = 0; t < 2000; ++t) {
    int n = 1 + static_cast<int>(rng() % 6);
    std::vector<std::vector<std::int64_t>> aug(n, std::vector<std::int64_t>(n + 1));
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
    std::vector<Rational> rhs(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= n; ++j) {
        // Sparse rows make singular systems common enough to test.
        aug[i][j] = (rng() % 3 == 0) ? 0 : entry(rng);
        if (j < n) a[i][j] = aug[i][j];
      }
      rhs[i] = aug[i][n];
    }
    auto fast = detail::solve_integer_system(aug);
    auto slow = testing::rational_solve(a, rhs);
    ASSERT_EQ(fast.has_value(), slow.has_value());
    if (!fast) continue;
    ++solved;
    ASSERT_GT(fast->denom, 0);
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(Rational(fast->numer[i], fast->denom), (*slow)[i]);
    }
  }
  EXPECT_GT(solved, 500);
}

TEST(ExactSolve, LargeEntriesFallBackToBigIntegers) {
  const std::int64_t big = std::int64_t{1} << 60;
  std::vector<std::vector<std::int64_t>> aug{
      {big, big - 1, 1}, {big - 3, big, 2}};
  auto sol = detail::solve_integer_system(aug);
  ASSERT_TRUE(sol.has_value());
  auto slow = testing::rational_solve(
      {{Rational(big), Rational(big - 1)}, {Rational(big - 3), Rational(big)}},
      {Rational(1), Rational(2)});
  ASSERT_TRUE(slow.has_value());
  EXPECT_EQ(Rational(sol->numer[0], sol->denom), (*slow)[0]);
  EXPECT_EQ(Rational(sol->numer[1], sol->denom), (*slow)[1]);
}

TEST(Bimatrix, TwoLargeSellersPayAsBid) {
  MarketInstance inst = gen_builtin("cor-pb");
  auto eqs = enumerate_mixed_ne_2p(Mechanism::PayAsBid, inst);
  ASSERT_EQ(eqs.size(), 1u);
  for (const auto& s : eqs[0]) {
    std::vector<int> support;
    for (const auto& [bid, p] : s) {
      if (p > 0) support.push_back(bid);
    }
    EXPECT_EQ(support, (std::vector<int>{2, 3, 4, 5}));
  }
  EXPECT_EQ(expected_unit_price(Mechanism::PayAsBid, inst, eqs[0]),
            make_rational(11, 4));
  EXPECT_TRUE(is_mixed_ne(Mechanism::PayAsBid, inst, eqs[0]).is_equilibrium);
}

TEST(Bimatrix, FindsEveryPureEquilibrium) {
  std::mt19937_64 rng(33);
  testing::RandomInstanceSpec spec;
  spec.min_agents = 2;
  spec.max_agents = 2;
  spec.max_max_bid = 6;
  for (int t = 0; t < 40; ++t) {
    MarketInstance inst = testing::random_instance(rng, spec);
    for (Mechanism m : {Mechanism::PayAsBid, Mechanism::PayAsClear}) {
      auto mixed = enumerate_mixed_ne_2p(m, inst);
      EXPECT_FALSE(mixed.empty());
      for (const auto& sigma : mixed) {
        EXPECT_TRUE(is_mixed_ne(m, inst, sigma).is_equilibrium);
      }
      // A pure equilibrium that is an extreme point must show up; every
      // strict pure equilibrium is one.
      for (const auto& b : enumerate_pure_ne(m, inst)) {
        bool strict = true;
        for (int i = 0; i < 2 && strict; ++i) {
          auto u = counterfactual_utilities(m, inst, b, i);
          for (int v = 0; v <= inst.max_bid; ++v) {
            if (v != b[i] && u[v] == u[b[i]]) strict = false;
          }
        }
        if (!strict) continue;
        EXPECT_NE(std::find(mixed.begin(), mixed.end(), point_mass(b)),
                  mixed.end());
      }
    }
  }
}

TEST(Bimatrix, RequiresTwoAgents) {
  EXPECT_THROW(enumerate_mixed_ne_2p(Mechanism::PayAsBid, gen_builtin("sec31")),
               InvalidArgument);
}

// Support and price bounds on small two-agent markets. The bounds speak
// about play at or above cost; pay-as-bid equilibria in which nobody earns
// anything can sit anywhere and are skipped.
TEST(BimatrixProperty, EquilibriaRespectBounds) {
  std::mt19937_64 rng(34);
  testing::RandomInstanceSpec spec;
  spec.min_agents = 2;
  spec.max_agents = 2;
  spec.max_max_bid = 8;
  int checked_pb = 0;
  for (int t = 0; t < 30; ++t) {
    MarketInstance inst = testing::random_instance(rng, spec);
    BoundsReport r = bounds_summary(inst);
    for (const auto& sigma : enumerate_mixed_ne_2p(Mechanism::PayAsBid, inst)) {
      if (!bids_at_least_cost(inst, sigma)) continue;
      auto u = expected_utilities(Mechanism::PayAsBid, inst, sigma);
      if (std::all_of(u.begin(), u.end(), [](const Rational& x) { return x == 0; })) {
        continue;
      }
      ++checked_pb;
      for (const auto& sold : selling_support(inst, sigma)) {
        for (int bid : sold) {
          EXPECT_GE(bid, r.pb_interval_lo);
          EXPECT_LE(bid, r.pb_interval_hi);
        }
      }
      EXPECT_LE(expected_unit_price(Mechanism::PayAsBid, inst, sigma),
                Rational(r.pc_pure_price));
    }
    for (const auto& sigma : enumerate_mixed_ne_2p(Mechanism::PayAsClear, inst)) {
      if (!bids_at_least_cost(inst, sigma)) continue;
      EXPECT_GE(expected_unit_price(Mechanism::PayAsClear, inst, sigma),
                r.pc_floor_exact);
    }
    for (const auto& b : enumerate_pure_ne(Mechanism::PayAsClear, inst)) {
      if (!bids_at_least_cost(inst, point_mass(b))) continue;
      EXPECT_GE(run_mechanism(Mechanism::PayAsClear, inst, b).unit_price,
                Rational(r.pc_floor));
    }
  }
  EXPECT_GT(checked_pb, 0);
}

// A mixed pay-as-clear equilibrium can price between the exact floor and
// its ceiling.
TEST(Bimatrix, MixedPayAsClearBelowCeiledFloor) {
  MarketInstance inst;
  inst.max_bid = 6;
  inst.producers = {{make_rational(3, 4), 1}, {make_rational(1, 2), 1}};
  BoundsReport r = bounds_summary(inst);
  EXPECT_EQ(r.pc_floor, 5);
  bool found = false;
  for (const auto& sigma : enumerate_mixed_ne_2p(Mechanism::PayAsClear, inst)) {
    Rational p = expected_unit_price(Mechanism::PayAsClear, inst, sigma);
    EXPECT_GE(p, r.pc_floor_exact);
    if (p == make_rational(19, 4)) found = true;
  }
  EXPECT_TRUE(found);
}

// Two sellers each able to cover demand alone, both with costs at the top of
// the range: matching at the cap is an equilibrium above the pure price.
TEST(Bimatrix, DegeneratePayAsBidAboveClearPrice) {
  MarketInstance inst;
  inst.max_bid = 6;
  inst.producers = {{Rational(1), 6}, {Rational(1), 5}};
  BoundsReport r = bounds_summary(inst);
  EXPECT_EQ(r.pc_pure_price, 5);
  EXPECT_TRUE(is_pure_ne(Mechanism::PayAsBid, inst, {6, 6}).is_equilibrium);
  auto u = expected_utilities(Mechanism::PayAsBid, inst, point_mass({6, 6}));
  EXPECT_EQ(u[0], 0);
  EXPECT_EQ(u[1], 0);
}

TEST(BimatrixProperty, TighterSupportWhenRefinedBoundApplies) {
  std::mt19937_64 rng(35);
  testing::RandomInstanceSpec spec;
  spec.min_agents = 2;
  spec.max_agents = 2;
  spec.max_max_bid = 10;
  int applicable = 0;
  for (int t = 0; t < 400 && applicable < 15; ++t) {
    MarketInstance inst = testing::random_instance(rng, spec);
    BoundsReport r = bounds_summary(inst);
    if (!r.refined_pb_bound) continue;
    ++applicable;
    int star = r.eligible.front();
    for (int j : r.eligible) {
      if (r.b_low[j] > r.b_low[star]) star = j;
    }
    for (const auto& sigma : enumerate_mixed_ne_2p(Mechanism::PayAsBid, inst)) {
      for (const auto& s : sigma) {
        for (const auto& [bid, p] : s) {
          if (p == 0) continue;
          EXPECT_GE(bid, r.b_low[star] - 1);
          EXPECT_LE(bid, r.b_high[star]);
        }
      }
      EXPECT_LE(expected_unit_price(Mechanism::PayAsBid, inst, sigma),
                *r.refined_pb_bound);
    }
  }
  EXPECT_GT(applicable, 0);
}

TEST(MonteCarlo, EstimatesPurePayAsClearEquilibriumNearZero) {
  MarketInstance inst = gen_builtin("sec31");
  FloatMixedProfile sigma(3, std::vector<double>(7, 0.0));
  BidProfile b = construct_pc_pure_ne(inst);
  for (int i = 0; i < 3; ++i) sigma[i][b[i]] = 1.0;
  MonteCarloReport rep = estimate_mixed_ne_monte_carlo(Mechanism::PayAsClear,
                                                       inst, sigma, 2000, 1);
  EXPECT_LE(rep.epsilon, 1e-12);
}

}  // namespace
}  // namespace pbpc
