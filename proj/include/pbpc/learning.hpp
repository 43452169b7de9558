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

// Hedge (multiplicative weights) bidding dynamics. Every agent keeps log
// weights over bids 0..M, samples a bid each round, and updates on the full
// vector of counterfactual gains against the sampled opponent bids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "pbpc/errors.hpp"
#include "pbpc/market.hpp"
#include "pbpc/mechanism.hpp"
#include "pbpc/rational.hpp"

namespace pbpc {

enum class Feedback { kSampled, kExact };

inline const char* to_string(Feedback f) {
  return f == Feedback::kSampled ? "sampled" : "exact";
}

inline Feedback parse_feedback(const std::string& text) {
  if (text == "sampled") return Feedback::kSampled;
  if (text == "exact") return Feedback::kExact;
  throw InvalidArgument("unknown feedback mode '" + text +
                        "' (expected sampled or exact)");
}

struct SimConfig {
  Mechanism mechanism = Mechanism::PayAsClear;
  std::uint64_t iterations = 1000;
  std::uint64_t seed = 0;
  std::optional<double> learning_rate;  // nullopt: tuned to the horizon
  std::uint64_t snapshot_every = 1;
  Feedback feedback = Feedback::kSampled;
  int workers = 1;
  // Opponent support-product cap per agent in exact-expectation mode.
  std::uint64_t exact_budget = 1'000'000;
};

struct HedgeState {
  std::vector<std::vector<double>> log_weights;  // [agent][bid]
  std::uint64_t iteration = 0;

  std::vector<double> probabilities(int agent) const {
    const auto& lw = log_weights[agent];
    double top = *std::max_element(lw.begin(), lw.end());
    std::vector<double> p(lw.size());
    double total = 0;
    for (std::size_t v = 0; v < lw.size(); ++v) {
      p[v] = std::exp(lw[v] - top);
      total += p[v];
    }
    for (double& x : p) x /= total;
    return p;
  }
};

inline HedgeState hedge_init(const MarketInstance& inst) {
  HedgeState st;
  st.log_weights.assign(inst.producers.size(),
                        std::vector<double>(inst.max_bid + 1, 0.0));
  return st;
}

/// sqrt(8 ln(M + 1) / T).
inline double auto_learning_rate(int max_bid, std::uint64_t horizon) {
  if (horizon == 0) throw InvalidArgument("horizon must be positive");
  return std::sqrt(8.0 * std::log(static_cast<double>(max_bid) + 1.0) /
                   static_cast<double>(horizon));
}

/// Independent per-agent random streams derived from (seed, agent), so that
/// the order or thread in which agents draw cannot change any draw.
class AgentStreams {
 public:
  AgentStreams(std::uint64_t seed, int agents) {
    for (int i = 0; i < agents; ++i) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed),
                        static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i), 0x9e3779b9u};
      engines_.emplace_back(seq);
    }
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(int agent) {
    return static_cast<double>(engines_[agent]() >> 11) * 0x1.0p-53;
  }

  /// Inverse-CDF draw from the agent's Hedge distribution.
  int sample(int agent, const std::vector<double>& log_weights) {
    double top = *std::max_element(log_weights.begin(), log_weights.end());
    double total = 0;
    for (double lw : log_weights) total += std::exp(lw - top);
    double target = uniform(agent) * total;
    double acc = 0;
    int last = 0;
    for (std::size_t v = 0; v < log_weights.size(); ++v) {
      double w = std::exp(log_weights[v] - top);
      if (w > 0) last = static_cast<int>(v);
      acc += w;
      if (target < acc) return static_cast<int>(v);
    }
    return last;
  }

 private:
  std::vector<std::mt19937_64> engines_;
};

/// Utility shifted and scaled into [0, 1]: (U + s c) / (s M). The shift is
/// constant per agent, so Hedge's distributions equal those for U / (s M).
inline std::vector<double> gains_from_segments(
    const MarketInstance& inst, int i,
    const std::vector<UtilitySegment>& segs) {
  std::vector<double> g(inst.max_bid + 1, 0.0);
  if (inst.max_bid == 0) return g;
  Rational scale = inst.supply(i) * inst.max_bid;
  Rational shift = inst.supply(i) * inst.cost(i);
  for (const auto& s : segs) {
    double slope = to_double(s.slope / scale);
    double icpt = to_double((s.intercept + shift) / scale);
    for (int v = s.lo; v <= s.hi; ++v) {
      g[v] = std::clamp(slope * v + icpt, 0.0, 1.0);
    }
  }
  return g;
}

namespace detail {

inline double opponent_support_product(const MarketInstance& inst, int i) {
  double count = 1;
  for (int j = 0; j < inst.num_agents(); ++j) {
    if (j != i) count *= inst.max_bid + 1;
  }
  return count;
}

// Expected gains against the opponents' current mixed strategies.
inline std::vector<double> expected_gains(const HedgeState& st,
                                          const MarketInstance& inst,
                                          Mechanism mech, int i) {
  const int n = inst.num_agents();
  const int w = inst.max_bid + 1;
  std::vector<std::vector<double>> probs(n);
  for (int j = 0; j < n; ++j) {
    if (j != i) probs[j] = st.probabilities(j);
  }
  std::vector<double> out(w, 0.0);
  BidProfile b(n, 0);
  while (true) {
    double weight = 1;
    for (int j = 0; j < n; ++j) {
      if (j != i) weight *= probs[j][b[j]];
    }
    if (weight > 0) {
      auto g = gains_from_segments(inst, i, utility_segments(mech, inst, b, i));
      for (int v = 0; v < w; ++v) out[v] += weight * g[v];
    }
    int pos = n - 1;
    while (pos >= 0 && (pos == i || b[pos] == inst.max_bid)) {
      if (pos != i) b[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++b[pos];
  }
  return out;
}

// Runs f(i) for every agent, split over `workers` threads. Each agent's work
// touches only its own slots, so results do not depend on the split.
template <typename F>
void for_each_agent(int n, int workers, F&& f) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  int used = std::min(workers, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(used);
  for (int t = 0; t < used; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = t; i < n; i += used) f(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

struct StepResult {
  BidProfile sampled;
  Outcome outcome;
  // gains[i][v]: scaled counterfactual gain used in the update.
  std::vector<std::vector<double>> gains;
};

/// One round: every agent samples a bid, then all agents update on their
/// gain vectors. Log weights are re-centred so the largest is 0.
inline StepResult hedge_step(HedgeState& st, const MarketInstance& inst,
                             Mechanism mech, AgentStreams& rng, double eta,
                             Feedback feedback = Feedback::kSampled,
                             int workers = 1) {
  const int n = inst.num_agents();
  StepResult res;
  res.sampled.resize(n);
  for (int i = 0; i < n; ++i) res.sampled[i] = rng.sample(i, st.log_weights[i]);
  res.outcome = run_mechanism(mech, inst, res.sampled);
  res.gains.assign(n, {});
  detail::for_each_agent(n, workers, [&](int i) {
    if (feedback == Feedback::kSampled) {
      res.gains[i] = gains_from_segments(
          inst, i, utility_segments(mech, inst, res.sampled, i));
    } else {
      res.gains[i] = detail::expected_gains(st, inst, mech, i);
    }
  });
  // Update after all gains are known: exact feedback reads every agent's
  // pre-update distribution.
  detail::for_each_agent(n, workers, [&](int i) {
    auto& lw = st.log_weights[i];
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < lw.size(); ++v) {
      lw[v] += eta * res.gains[i][v];
      top = std::max(top, lw[v]);
    }
    if (!std::isfinite(top)) {
      throw Error("non-finite Hedge weight for agent " + std::to_string(i));
    }
    for (double& x : lw) x -= top;
  });
  ++st.iteration;
  return res;
}

struct TrajectoryRecord {
  std::uint64_t iteration = 0;  // 1-based
  double unit_price = 0;
  double normalized_unit_price = 0;
  double time_avg_unit_price = 0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<std::vector<double>> final_strategies;
  // Realized external regret per agent, in utility units.
  std::vector<double> regret;
  double time_avg_unit_price = 0;
  double learning_rate = 0;
  std::uint64_t iterations = 0;
};

inline void check_config(const MarketInstance& inst, const SimConfig& cfg) {
  if (cfg.iterations == 0) throw InvalidArgument("iterations must be positive");
  if (cfg.snapshot_every == 0) {
    throw InvalidArgument("snapshot interval must be positive");
  }
  if (cfg.learning_rate && !(*cfg.learning_rate >= 0 &&
                             std::isfinite(*cfg.learning_rate))) {
    throw InvalidArgument("learning rate must be a finite nonnegative number");
  }
  if (cfg.workers < 1) throw InvalidArgument("workers must be at least 1");
  if (cfg.feedback == Feedback::kExact) {
    for (int i = 0; i < inst.num_agents(); ++i) {
      if (detail::opponent_support_product(inst, i) >
          static_cast<double>(cfg.exact_budget)) {
        throw BudgetExceeded(
            "exact-expectation feedback needs more than " +
            std::to_string(cfg.exact_budget) +
            " opponent profiles per agent; use sampled feedback");
      }
    }
  }
}

inline Trajectory run_simulation(const MarketInstance& inst,
                                 const SimConfig& cfg) {
  require_valid(inst);
  check_config(inst, cfg);
  const int n = inst.num_agents();
  const int w = inst.max_bid + 1;
  double eta = cfg.learning_rate ? *cfg.learning_rate
                                 : auto_learning_rate(inst.max_bid, cfg.iterations);
  HedgeState st = hedge_init(inst);
  AgentStreams rng(cfg.seed, n);
  Trajectory traj;
  traj.learning_rate = eta;
  traj.iterations = cfg.iterations;
  std::vector<std::vector<double>> cumulative(n, std::vector<double>(w, 0.0));
  std::vector<double> realized(n, 0.0);
  double price_sum = 0;
  for (std::uint64_t t = 1; t <= cfg.iterations; ++t) {
    StepResult step =
        hedge_step(st, inst, cfg.mechanism, rng, eta, cfg.feedback, cfg.workers);
    for (int i = 0; i < n; ++i) {
      for (int v = 0; v < w; ++v) cumulative[i][v] += step.gains[i][v];
      realized[i] += step.gains[i][step.sampled[i]];
    }
    double price = to_double(step.outcome.unit_price);
    price_sum += price;
    if (t % cfg.snapshot_every == 0 || t == cfg.iterations) {
      TrajectoryRecord rec;
      rec.iteration = t;
      rec.unit_price = price;
      rec.normalized_unit_price =
          inst.max_bid > 0 ? price / inst.max_bid : 0.0;
      rec.time_avg_unit_price = price_sum / static_cast<double>(t);
      traj.records.push_back(rec);
    }
  }
  traj.time_avg_unit_price = price_sum / static_cast<double>(cfg.iterations);
  traj.regret.resize(n);
  for (int i = 0; i < n; ++i) {
    traj.final_strategies.push_back(st.probabilities(i));
    double best = *std::max_element(cumulative[i].begin(), cumulative[i].end());
    traj.regret[i] = (best - realized[i]) * to_double(inst.supply(i)) *
                     std::max(inst.max_bid, 1);
  }
  return traj;
}

struct TrajectorySummary {
  // Over the trailing window of records, normalized unit price.
  double window_mean = 0;
  double window_min = 0;
  double window_max = 0;
  // Over the whole run, unit price.
  double time_avg_unit_price = 0;
  std::size_t window = 0;
};

inline TrajectorySummary summarize(const Trajectory& traj, std::size_t window) {
  if (traj.records.empty()) throw InvalidArgument("empty trajectory");
  if (window == 0 || window > traj.records.size()) {
    throw InvalidArgument("window must be in [1, number of records]");
  }
  TrajectorySummary s;
  s.window = window;
  s.window_min = std::numeric_limits<double>::infinity();
  s.window_max = -std::numeric_limits<double>::infinity();
  double sum = 0;
  for (std::size_t k = traj.records.size() - window; k < traj.records.size();
       ++k) {
    double x = traj.records[k].normalized_unit_price;
    sum += x;
    s.window_min = std::min(s.window_min, x);
    s.window_max = std::max(s.window_max, x);
  }
  s.window_mean = sum / static_cast<double>(window);
  s.time_avg_unit_price = traj.time_avg_unit_price;
  return s;
}

}  // namespace pbpc
