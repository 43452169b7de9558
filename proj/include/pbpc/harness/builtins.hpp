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

// Registry of named markets and the two parametric families.

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pbpc/errors.hpp"
#include "pbpc/harness/instance_io.hpp"
#include "pbpc/market.hpp"
#include "pbpc/rational.hpp"

namespace pbpc::harness {

namespace detail {

inline MarketInstance make_instance(std::string name, int max_bid,
                                    const std::vector<std::string>& supplies,
                                    const std::vector<int>& costs) {
  MarketInstance inst;
  inst.name = std::move(name);
  inst.max_bid = max_bid;
  for (std::size_t k = 0; k < supplies.size(); ++k) {
    inst.producers.push_back(Producer{parse_rational(supplies[k]), costs[k]});
  }
  return inst;
}

}  // namespace detail

/// Family with a Theta(log n) gap between truthful VCG and pay-as-clear:
/// k zero-cost agents of supply 1/k, one of supply 1/(2k) at cost delta, and
/// k - 2 agents j = 2..k-1 of supply 1/(k j (j + 1)) at cost delta j - 2.
inline MarketInstance gen_vcg_family(int k, int delta) {
  if (k < 2) throw InvalidArgument("vcg family needs k >= 2");
  if (delta <= 2) throw InvalidArgument("vcg family needs delta > 2");
  MarketInstance inst;
  inst.name = "vcg:" + std::to_string(k) + "," + std::to_string(delta);
  inst.max_bid = delta * k - 2;
  for (int i = 1; i <= 2 * k - 1; ++i) {
    Producer p;
    if (i <= k) {
      p.supply = Rational(Integer(1), Integer(k));
      p.cost = 0;
    } else if (i == k + 1) {
      p.supply = Rational(Integer(1), Integer(2 * k));
      p.cost = delta;
    } else {
      int j = i - k;
      p.supply = Rational(Integer(1), Integer(k) * j * (j + 1));
      p.cost = delta * j - 2;
    }
    inst.producers.push_back(std::move(p));
  }
  return inst;
}

/// Three agents where the best pay-as-clear equilibrium beats every
/// pay-as-bid one: M = 3 delta, s = (1/2, 3/4, 1/4), c = (0, 0, delta).
inline MarketInstance gen_bestpc_family(int delta) {
  if (delta < 1) throw InvalidArgument("bestpc family needs delta >= 1");
  return detail::make_instance("bestpc:" + std::to_string(delta), 3 * delta,
                               {"1/2", "3/4", "1/4"}, {0, 0, delta});
}

/// Two agents of supply 3/4 at zero cost: no pure pay-as-bid equilibrium.
inline MarketInstance gen_cor_pb(int max_bid) {
  if (max_bid < 5) throw InvalidArgument("cor-pb needs max_bid >= 5");
  return detail::make_instance("cor-pb:" + std::to_string(max_bid), max_bid,
                               {"3/4", "3/4"}, {0, 0});
}

/// Two full-supply agents with costs 0 and M: truthful pay-as-clear is not
/// an equilibrium.
inline MarketInstance gen_cor_pc(int max_bid) {
  if (max_bid < 2) throw InvalidArgument("cor-pc needs max_bid >= 2");
  return detail::make_instance("cor-pc:" + std::to_string(max_bid), max_bid,
                               {"1", "1"}, {0, max_bid});
}

struct BuiltinEntry {
  std::string name;
  std::string description;
  std::function<MarketInstance()> make;
};

inline const std::vector<BuiltinEntry>& builtin_registry() {
  using detail::make_instance;
  static const std::vector<BuiltinEntry> registry = {
      {"example1", "4 agents, s=(1/3,1/2,1/4,2/3), c=(0,1,2,3), M=3",
       [] {
         return make_instance("example1", 3, {"1/3", "1/2", "1/4", "2/3"},
                              {0, 1, 2, 3});
       }},
      {"sec31", "3 agents, s=(3/4,3/4,1/10), c=(0,1,4), M=6",
       [] {
         return make_instance("sec31", 6, {"3/4", "3/4", "1/10"}, {0, 1, 4});
       }},
      {"cor-pc", "2 agents, s=(1,1), c=(0,M), M=5",
       [] {
         auto inst = gen_cor_pc(5);
         inst.name = "cor-pc";
         return inst;
       }},
      {"cor-pb", "2 agents, s=(3/4,3/4), c=(0,0), M=5",
       [] {
         auto inst = gen_cor_pb(5);
         inst.name = "cor-pb";
         return inst;
       }},
      {"fig2", "bestpc family with delta=300: M=900, s=(1/2,3/4,1/4), c=(0,0,300)",
       [] {
         auto inst = gen_bestpc_family(300);
         inst.name = "fig2";
         return inst;
       }},
      {"fig3", "4 agents, s=0.3, c=0, M=800",
       [] {
         return make_instance("fig3", 800, {"0.3", "0.3", "0.3", "0.3"},
                              {0, 0, 0, 0});
       }},
      {"fig4", "3 agents, s=0.4, c=0, M=800",
       [] {
         return make_instance("fig4", 800, {"0.4", "0.4", "0.4"}, {0, 0, 0});
       }},
      {"fig5", "2 agents, s=0.99, c=0, M=800",
       [] { return make_instance("fig5", 800, {"0.99", "0.99"}, {0, 0}); }},
      {"fig6", "alias of fig2",
       [] {
         auto inst = gen_bestpc_family(300);
         inst.name = "fig6";
         return inst;
       }},
      // The fifth supply is read as 0.26; any value in (0, 1] leaves the
      // bounds unchanged because that agent is never eligible.
      {"fig7", "5 agents, s=(0.72,0.15,0.47,0.96,0.26), c=(390,280,30,510,680), M=1000",
       [] {
         return make_instance("fig7", 1000,
                              {"0.72", "0.15", "0.47", "0.96", "0.26"},
                              {390, 280, 30, 510, 680});
       }},
      {"fig7-scaled", "fig7 with M=10000 and costs times 10",
       [] {
         return make_instance("fig7-scaled", 10000,
                              {"0.72", "0.15", "0.47", "0.96", "0.26"},
                              {3900, 2800, 300, 5100, 6800});
       }},
      {"fig8", "4 agents, s=(0.75,0.75,0.1,0.05), c=(0,100,400,600), M=800",
       [] {
         return make_instance("fig8", 800, {"0.75", "0.75", "0.1", "0.05"},
                              {0, 100, 400, 600});
       }},
      {"fig9", "5 agents, s=(0.25,0.25,0.25,0.25,0.11), c=(0,0,0,0,600), M=1000",
       [] {
         return make_instance("fig9", 1000,
                              {"0.25", "0.25", "0.25", "0.25", "0.11"},
                              {0, 0, 0, 0, 600});
       }},
  };
  return registry;
}

inline std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& e : builtin_registry()) names.push_back(e.name);
  return names;
}

inline MarketInstance gen_builtin(const std::string& name) {
  for (const auto& e : builtin_registry()) {
    if (e.name == name) return e.make();
  }
  std::string known;
  for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown builtin instance '" + name + "' (known: " +
                        known + ")");
}

namespace detail {

inline std::vector<int> parse_int_list(const std::string& text,
                                       const std::string& spec) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string part = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      int v = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InvalidArgument("bad parameter '" + part + "' in '" + spec + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Generator spec ("vcg:k,delta", "bestpc:delta", "cor-pb:M", "cor-pc:M") or
/// builtin name.
inline MarketInstance gen_instance(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) return gen_builtin(spec);
  std::string family = spec.substr(0, colon);
  std::vector<int> args = detail::parse_int_list(spec.substr(colon + 1), spec);
  auto want = [&](std::size_t n) {
    if (args.size() != n) {
      throw InvalidArgument("'" + family + "' takes " + std::to_string(n) +
                            " parameter(s)");
    }
  };
  if (family == "vcg") {
    want(2);
    return gen_vcg_family(args[0], args[1]);
  }
  if (family == "bestpc") {
    want(1);
    return gen_bestpc_family(args[0]);
  }
  if (family == "cor-pb") {
    want(1);
    return gen_cor_pb(args[0]);
  }
  if (family == "cor-pc") {
    want(1);
    return gen_cor_pc(args[0]);
  }
  throw InvalidArgument("unknown generator family '" + family + "'");
}

/// An existing file path is loaded; anything else is a generator spec or a
/// builtin name.
inline MarketInstance resolve_instance(const std::string& ref) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(ref, ec)) return load_instance(ref);
  return gen_instance(ref);
}

}  // namespace pbpc::harness
