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

// JSON instance and profile files.
//
// Instance:
//   {"name": "fig3", "max_bid": 800,
//    "producers": [[3, 10, 0], [3, 10, 0], ...]}   // numerator, denominator, cost
// Producers may also be written as {"supply": S, "cost": c} where S is
// [n, d], "n/d", "0.3" or a JSON number; decimals are converted exactly
// (0.3 becomes 3/10).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "pbpc/errors.hpp"
#include "pbpc/harness/atomic_file.hpp"
#include "pbpc/market.hpp"
#include "pbpc/nash.hpp"
#include "pbpc/rational.hpp"

namespace pbpc::harness {

using json = nlohmann::json;

inline json integer_to_json(const Integer& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() &&
      v <= std::numeric_limits<std::int64_t>::max()) {
    return static_cast<std::int64_t>(v);
  }
  return v.str();
}

/// Integers as JSON numbers, other values as "n/d".
inline json rational_to_json(const Rational& r) {
  if (denominator_of(r) == 1) return integer_to_json(numerator_of(r));
  return to_string(r);
}

inline Integer integer_from_json(const json& j, const std::string& where) {
  if (j.is_number_integer()) {
    return j.is_number_unsigned() ? Integer(j.get<std::uint64_t>())
                                  : Integer(j.get<std::int64_t>());
  }
  if (j.is_string()) {
    Rational r;
    try {
      r = parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (denominator_of(r) != 1) throw ParseError(where + ": not an integer");
    return numerator_of(r);
  }
  throw ParseError(where + ": expected an integer");
}

inline Rational rational_from_json(const json& j, const std::string& where) {
  try {
    if (j.is_array()) {
      if (j.size() != 2) {
        throw ParseError(where + ": fraction must be [numerator, denominator]");
      }
      Integer num = integer_from_json(j[0], where);
      Integer den = integer_from_json(j[1], where);
      if (den == 0) throw ParseError(where + ": zero denominator");
      return Rational(num, den);
    }
    if (j.is_number_integer()) return Rational(integer_from_json(j, where));
    if (j.is_number_float()) {
      return rational_from_shortest_decimal(j.get<double>());
    }
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": expected a number, \"n/d\" or [n, d]");
}

inline int int_from_json(const json& j, const std::string& where) {
  Integer v = integer_from_json(j, where);
  if (v < std::numeric_limits<int>::min() ||
      v > std::numeric_limits<int>::max()) {
    throw ParseError(where + ": integer out of range");
  }
  return static_cast<int>(v);
}

inline json instance_to_json(const MarketInstance& inst) {
  json producers = json::array();
  for (const auto& p : inst.producers) {
    producers.push_back(json::array({integer_to_json(numerator_of(p.supply)),
                                     integer_to_json(denominator_of(p.supply)),
                                     p.cost}));
  }
  return json{{"name", inst.name},
              {"max_bid", inst.max_bid},
              {"producers", std::move(producers)}};
}

/// Parses without validating the market constraints.
inline MarketInstance instance_from_json_unchecked(const json& j) {
  if (!j.is_object()) throw ParseError("instance must be a JSON object");
  MarketInstance inst;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ParseError("name must be a string");
    inst.name = j["name"].get<std::string>();
  }
  if (!j.contains("max_bid")) throw ParseError("missing max_bid");
  inst.max_bid = int_from_json(j["max_bid"], "max_bid");
  if (!j.contains("producers") || !j["producers"].is_array()) {
    throw ParseError("missing producers array");
  }
  for (std::size_t k = 0; k < j["producers"].size(); ++k) {
    const json& e = j["producers"][k];
    std::string where = "producers[" + std::to_string(k) + "]";
    Producer p;
    if (e.is_array() && e.size() == 3) {
      p.supply = rational_from_json(json::array({e[0], e[1]}), where);
      p.cost = int_from_json(e[2], where + " cost");
    } else if (e.is_array() && e.size() == 2) {
      p.supply = rational_from_json(e[0], where + " supply");
      p.cost = int_from_json(e[1], where + " cost");
    } else if (e.is_object()) {
      if (!e.contains("supply") || !e.contains("cost")) {
        throw ParseError(where + ": needs supply and cost");
      }
      p.supply = rational_from_json(e["supply"], where + " supply");
      p.cost = int_from_json(e["cost"], where + " cost");
    } else {
      throw ParseError(where +
                       ": expected [num, den, cost], [supply, cost] or object");
    }
    inst.producers.push_back(std::move(p));
  }
  return inst;
}

/// Parses and validates, reporting every violated constraint together.
inline MarketInstance instance_from_json(const json& j) {
  MarketInstance inst = instance_from_json_unchecked(j);
  ValidationReport report = validate_instance(inst);
  if (!report.ok()) throw ValidationError(report.problems);
  return inst;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline MarketInstance load_instance(const std::filesystem::path& path) {
  MarketInstance inst = instance_from_json(read_json_file(path));
  if (inst.name.empty()) inst.name = path.stem().string();
  return inst;
}

inline void save_instance(const std::filesystem::path& path,
                          const MarketInstance& inst) {
  write_file_atomic(path, instance_to_json(inst).dump(2) + "\n");
}

/// Canonical text of the market content (the name is not part of it).
inline std::string canonical_instance_text(const MarketInstance& inst) {
  std::string out = "max_bid=" + std::to_string(inst.max_bid);
  for (const auto& p : inst.producers) {
    out += ";" + to_string(p.supply) + "@" + std::to_string(p.cost);
  }
  return out;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) {
    hex << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[k]);
  }
  return hex.str();
}

inline std::string instance_digest(const MarketInstance& inst) {
  return "sha256:" + sha256_hex(canonical_instance_text(inst));
}

// Profiles: {"bids": [..]} for pure, {"mixed": [{"bid": prob, ..}, ..]} or
// {"mixed": [[[bid, prob], ..], ..]} for mixed.
struct ProfileFile {
  std::optional<BidProfile> pure;
  std::optional<MixedProfile> mixed;
};

inline ProfileFile profile_from_json(const json& j) {
  ProfileFile pf;
  const json* bids = nullptr;
  if (j.is_array()) bids = &j;
  if (j.is_object() && j.contains("bids")) bids = &j["bids"];
  if (bids != nullptr) {
    BidProfile b;
    for (std::size_t k = 0; k < bids->size(); ++k) {
      b.push_back(int_from_json((*bids)[k], "bids[" + std::to_string(k) + "]"));
    }
    pf.pure = std::move(b);
    return pf;
  }
  if (!j.is_object() || !j.contains("mixed") || !j["mixed"].is_array()) {
    throw ParseError("profile must contain \"bids\" or \"mixed\"");
  }
  MixedProfile sigma;
  for (std::size_t i = 0; i < j["mixed"].size(); ++i) {
    const json& d = j["mixed"][i];
    std::string where = "mixed[" + std::to_string(i) + "]";
    MixedStrategy s;
    if (d.is_object()) {
      for (auto it = d.begin(); it != d.end(); ++it) {
        int bid = int_from_json(json(it.key()), where);
        s[bid] += rational_from_json(it.value(), where);
      }
    } else if (d.is_array()) {
      for (const auto& e : d) {
        if (!e.is_array() || e.size() != 2) {
          throw ParseError(where + ": entries must be [bid, probability]");
        }
        s[int_from_json(e[0], where)] += rational_from_json(e[1], where);
      }
    } else {
      throw ParseError(where + ": expected object or array");
    }
    sigma.push_back(std::move(s));
  }
  pf.mixed = std::move(sigma);
  return pf;
}

inline json mixed_profile_to_json(const MixedProfile& sigma) {
  json out = json::array();
  for (const auto& s : sigma) {
    json d = json::object();
    for (const auto& [bid, p] : s) d[std::to_string(bid)] = rational_to_json(p);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace pbpc::harness
