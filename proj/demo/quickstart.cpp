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

// A tour of the library on two small markets.

#include <iostream>
#include <string>

#include "pbpc/bounds.hpp"
#include "pbpc/learning.hpp"
#include "pbpc/mechanism.hpp"
#include "pbpc/nash.hpp"

namespace {

pbpc::MarketInstance four_sellers() {
  pbpc::MarketInstance inst;
  inst.name = "four-sellers";
  inst.max_bid = 3;
  inst.producers = {{pbpc::make_rational(1, 3), 0},
                    {pbpc::make_rational(1, 2), 1},
                    {pbpc::make_rational(1, 4), 2},
                    {pbpc::make_rational(2, 3), 3}};
  return inst;
}

pbpc::MarketInstance three_sellers() {
  pbpc::MarketInstance inst;
  inst.name = "three-sellers";
  inst.max_bid = 6;
  inst.producers = {{pbpc::make_rational(3, 4), 0},
                    {pbpc::make_rational(3, 4), 1},
                    {pbpc::make_rational(1, 10), 4}};
  return inst;
}

std::string join(const std::vector<pbpc::Rational>& v) {
  std::string out;
  for (const auto& r : v) out += (out.empty() ? "" : " ") + pbpc::to_string(r);
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (int x : v) out += (out.empty() ? "" : " ") + std::to_string(x);
  return out;
}

}  // namespace

int main() {
  using namespace pbpc;

  MarketInstance a = four_sellers();
  BidProfile truthful = truthful_profile(a);
  std::cout << a.name << ", everyone bids cost\n";
  for (Mechanism m : kAllMechanisms) {
    Outcome o = run_mechanism(m, a, truthful);
    std::cout << "  " << to_string(m) << ": allocation [" << join(o.allocation)
              << "] prices [" << join(o.prices)
              << "] unit price " << to_string(o.unit_price) << "\n";
  }

  MarketInstance b = three_sellers();
  BoundsReport r = bounds_summary(b);
  std::cout << "\n" << b.name << "\n"
            << "  highest best responses: " << join(r.b_high) << "\n"
            << "  guaranteed-utility floors: " << join(r.b_low) << "\n";
  BidProfile ne = construct_pc_pure_ne(b);
  NeReport check = is_pure_ne(Mechanism::PayAsClear, b, ne);
  std::cout << "  pay-as-clear equilibrium [" << join(ne) << "] verified: "
            << (check.is_equilibrium ? "yes" : "no") << ", unit price "
            << to_string(run_mechanism(Mechanism::PayAsClear, b, ne).unit_price)
            << "\n";

  SimConfig cfg;
  cfg.iterations = 2000;
  cfg.seed = 1;
  for (Mechanism m : {Mechanism::PayAsBid, Mechanism::PayAsClear}) {
    cfg.mechanism = m;
    Trajectory t = run_simulation(b, cfg);
    std::cout << "  Hedge, " << to_string(m) << ", " << cfg.iterations
              << " rounds: time-average unit price " << t.time_avg_unit_price
              << "\n";
  }
  return 0;
}
