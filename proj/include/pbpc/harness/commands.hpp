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

// Subcommand bodies, separated from argument parsing so they can be driven
// in-process by tests. Each returns a process exit status.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbpc/bimatrix.hpp"
#include "pbpc/bounds.hpp"
#include "pbpc/errors.hpp"
#include "pbpc/harness/atomic_file.hpp"
#include "pbpc/harness/builtins.hpp"
#include "pbpc/harness/instance_io.hpp"
#include "pbpc/harness/manifest.hpp"
#include "pbpc/harness/report.hpp"
#include "pbpc/learning.hpp"
#include "pbpc/mechanism.hpp"
#include "pbpc/nash.hpp"

namespace pbpc::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitBudget = 3,
};

/// Runs `body`, mapping library errors to exit codes and messages on `err`.
inline int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: invalid instance\n";
    for (const auto& p : e.problems()) err << "  - " << p << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const InfeasibleInstance& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const BudgetExceeded& e) {
    err << "error: budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

/// Replaces characters that are awkward in file names.
inline std::string file_stem_for(const std::string& name) {
  std::string out;
  for (char ch : name) {
    bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    out += keep ? ch : '_';
  }
  return out.empty() ? "instance" : out;
}

/// Writes to stdout for "-" and empty paths, atomically to a file otherwise.
inline void emit(const std::string& path, const std::string& content,
                 std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

inline BHighMethod parse_b_high_method(const std::string& text) {
  if (text == "auto") return BHighMethod::kAuto;
  if (text == "exhaustive") return BHighMethod::kExhaustive;
  if (text == "pruned") return BHighMethod::kBranchAndBound;
  throw InvalidArgument("unknown b_high method '" + text +
                        "' (expected auto, exhaustive or pruned)");
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string instance;
  std::string out;  // "-" or empty: stdout
  std::string method = "auto";
  std::uint64_t node_budget = 20'000'000;
};

inline json analyze_json(const MarketInstance& inst, const BHighOptions& bh) {
  BoundsOptions bo;
  bo.b_high = bh;
  json j = bounds_to_json(inst, bounds_summary(inst, bo));
  json truthful = json::object();
  BidProfile c = truthful_profile(inst);
  for (Mechanism m : kAllMechanisms) {
    truthful[to_string(m)] = outcome_to_json(m, run_mechanism(m, inst, c));
  }
  j["truthful"] = std::move(truthful);
  if (auto m = truthful_manipulability(inst)) {
    j["pc_truthful_deviation"] = json{
        {"agent", m->agent}, {"bid", m->bid}, {"gain", rational_to_json(m->gain)}};
  } else {
    j["pc_truthful_deviation"] = nullptr;
  }
  return j;
}

inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out,
                       std::ostream& err) {
  return run_guarded(err, [&] {
    MarketInstance inst = resolve_instance(opt.instance);
    BHighOptions bh;
    bh.method = parse_b_high_method(opt.method);
    bh.node_budget = opt.node_budget;
    emit(opt.out, analyze_json(inst, bh).dump(2) + "\n", out);
    return kExitOk;
  });
}

// --------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string instance;
  SimConfig config;
  std::string out;  // empty: <name>-<mech>-seed<S>.csv, "-": stdout
  bool write_manifest = true;
};

inline std::string default_trajectory_path(const MarketInstance& inst,
                                           Mechanism mech, std::uint64_t seed) {
  return file_stem_for(inst.name) + "-" + to_string(mech) + "-seed" +
         std::to_string(seed) + ".csv";
}

/// Runs one simulation and writes its CSV and manifest into `outputs`.
inline Trajectory simulate_to(const MarketInstance& inst, const SimConfig& cfg,
                              const std::string& csv_path, bool with_manifest,
                              OutputSet& outputs) {
  RunManifest man;
  man.started_at = utc_timestamp(std::chrono::system_clock::now());
  Trajectory traj = run_simulation(inst, cfg);
  man.finished_at = utc_timestamp(std::chrono::system_clock::now());
  outputs.write(csv_path, trajectory_csv(traj));
  if (with_manifest) {
    man.instance_digest = instance_digest(inst);
    man.instance = instance_to_json(inst);
    man.config = cfg;
    man.workers = cfg.workers;
    man.learning_rate = traj.learning_rate;
    man.outputs = {csv_path};
    outputs.write(csv_path + ".manifest.json", man.to_json().dump(2) + "\n");
  }
  return traj;
}

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out,
                        std::ostream& err) {
  return run_guarded(err, [&] {
    MarketInstance inst = resolve_instance(opt.instance);
    if (opt.out == "-") {
      out << trajectory_csv(run_simulation(inst, opt.config));
      return kExitOk;
    }
    std::string path = opt.out.empty()
                           ? default_trajectory_path(inst, opt.config.mechanism,
                                                     opt.config.seed)
                           : opt.out;
    OutputSet outputs;
    Trajectory traj = simulate_to(inst, opt.config, path, opt.write_manifest,
                                  outputs);
    outputs.commit();
    err << "wrote " << path << " (" << traj.records.size()
        << " records, time-average unit price "
        << format_double(traj.time_avg_unit_price) << ")\n";
    return kExitOk;
  });
}

// -------------------------------------------------------------- enumerate

struct EnumerateOptions {
  std::string instance;
  Mechanism mechanism = Mechanism::PayAsBid;
  bool mixed_2p = false;
  std::string out;
  std::uint64_t profile_budget = 10'000'000;
  int max_support = 0;
};

inline json enumerate_json(const MarketInstance& inst,
                           const EnumerateOptions& opt) {
  json eqs = json::array();
  if (opt.mixed_2p) {
    BimatrixOptions bo;
    bo.max_support = opt.max_support;
    for (const auto& sigma :
         enumerate_mixed_ne_2p(opt.mechanism, inst, bo)) {
      eqs.push_back(json{
          {"strategies", mixed_profile_to_json(sigma)},
          {"expected_unit_price",
           rational_to_json(expected_unit_price(opt.mechanism, inst, sigma))}});
    }
  } else {
    PureEnumerationOptions po;
    po.profile_budget = opt.profile_budget;
    for (const auto& b : enumerate_pure_ne(opt.mechanism, inst, po)) {
      eqs.push_back(json{
          {"bids", b},
          {"unit_price",
           rational_to_json(run_mechanism(opt.mechanism, inst, b).unit_price)}});
    }
  }
  return json{{"instance", inst.name},
              {"digest", instance_digest(inst)},
              {"mechanism", to_string(opt.mechanism)},
              {"mode", opt.mixed_2p ? "mixed2p" : "pure"},
              {"count", eqs.size()},
              {"equilibria", std::move(eqs)}};
}

inline int cmd_enumerate(const EnumerateOptions& opt, std::ostream& out,
                         std::ostream& err) {
  return run_guarded(err, [&] {
    MarketInstance inst = resolve_instance(opt.instance);
    emit(opt.out, enumerate_json(inst, opt).dump(2) + "\n", out);
    return kExitOk;
  });
}

// -------------------------------------------------------------- reproduce

struct ReproduceOptions {
  std::string figure;
  std::string out_dir;
  std::vector<std::uint64_t> seeds = {1};
  std::uint64_t iterations = 20'000;
  std::uint64_t snapshot_every = 1;
  int workers = 1;
};

inline const std::vector<std::string>& reproducible_figures() {
  static const std::vector<std::string> figs = {"fig2", "fig3", "fig4", "fig5",
                                                "fig6", "fig7", "fig8", "fig9"};
  return figs;
}

inline int cmd_reproduce(const ReproduceOptions& opt, std::ostream& out,
                         std::ostream& err) {
  (void)out;
  return run_guarded(err, [&] {
    const auto& figs = reproducible_figures();
    if (std::find(figs.begin(), figs.end(), opt.figure) == figs.end()) {
      std::string known;
      for (const auto& f : figs) known += (known.empty() ? "" : ", ") + f;
      throw InvalidArgument("cannot reproduce '" + opt.figure +
                            "' (known: " + known + ")");
    }
    if (opt.out_dir.empty()) throw InvalidArgument("--out DIR is required");
    if (opt.seeds.empty()) throw InvalidArgument("at least one seed is needed");
    MarketInstance inst = gen_builtin(opt.figure);
    namespace fs = std::filesystem;
    fs::path dir(opt.out_dir);
    OutputSet outputs;

    BoundsOptions bo;
    bo.eligible_only = true;
    BoundsReport bounds = bounds_summary(inst, bo);
    outputs.write(dir / (opt.figure + "-bounds.json"),
                  bounds_to_json(inst, bounds).dump(2) + "\n");

    json runs = json::array();
    const std::size_t quarter_skip = 4;
    for (Mechanism mech : {Mechanism::PayAsBid, Mechanism::PayAsClear}) {
      for (std::uint64_t seed : opt.seeds) {
        SimConfig cfg;
        cfg.mechanism = mech;
        cfg.iterations = opt.iterations;
        cfg.seed = seed;
        cfg.snapshot_every = opt.snapshot_every;
        cfg.workers = opt.workers;
        fs::path csv = dir / (opt.figure + "-" + to_string(mech) + "-seed" +
                              std::to_string(seed) + ".csv");
        Trajectory traj = simulate_to(inst, cfg, csv.string(), true, outputs);
        std::size_t window =
            std::max<std::size_t>(1, traj.records.size() / quarter_skip);
        json run = summary_to_json(summarize(traj, window));
        run["mechanism"] = to_string(mech);
        run["seed"] = seed;
        run["csv"] = csv.filename().string();
        runs.push_back(std::move(run));
        err << "  " << opt.figure << " " << to_string(mech) << " seed " << seed
            << ": time-average unit price "
            << format_double(traj.time_avg_unit_price) << "\n";
      }
    }
    json summary{{"figure", opt.figure},
                 {"digest", instance_digest(inst)},
                 {"iterations", opt.iterations},
                 {"pc_pure_price", bounds.pc_pure_price},
                 {"pc_floor", bounds.pc_floor},
                 {"runs", std::move(runs)}};
    outputs.write(dir / (opt.figure + "-summary.json"), summary.dump(2) + "\n");
    outputs.commit();
    err << "wrote " << outputs.written().size() << " files to " << dir.string()
        << "\n";
    return kExitOk;
  });
}

// -------------------------------------------------------------------- gen

struct GenOptions {
  std::string spec;
  std::string out;
};

inline int cmd_gen(const GenOptions& opt, std::ostream& out,
                   std::ostream& err) {
  return run_guarded(err, [&] {
    MarketInstance inst = gen_instance(opt.spec);
    require_valid(inst);
    emit(opt.out, instance_to_json(inst).dump(2) + "\n", out);
    return kExitOk;
  });
}

// ----------------------------------------------------------------- verify

struct VerifyOptions {
  std::string instance;
  std::string profile;
  Mechanism mechanism = Mechanism::PayAsClear;
  std::string tolerance = "0";
};

inline int cmd_verify(const VerifyOptions& opt, std::ostream& out,
                      std::ostream& err) {
  return run_guarded(err, [&] {
    MarketInstance inst = resolve_instance(opt.instance);
    ProfileFile pf = profile_from_json(read_json_file(opt.profile));
    Rational tol;
    try {
      tol = parse_rational(opt.tolerance);
    } catch (const std::exception& e) {
      throw InvalidArgument(std::string("bad tolerance: ") + e.what());
    }
    NeReport rep;
    Rational price;
    if (pf.pure) {
      check_profile(inst, *pf.pure);
      rep = is_pure_ne(opt.mechanism, inst, *pf.pure, tol);
      price = run_mechanism(opt.mechanism, inst, *pf.pure).unit_price;
    } else {
      rep = is_mixed_ne(opt.mechanism, inst, *pf.mixed, tol);
      price = expected_unit_price(opt.mechanism, inst, *pf.mixed);
    }
    json j{{"instance", inst.name},
           {"mechanism", to_string(opt.mechanism)},
           {"is_equilibrium", rep.is_equilibrium},
           {"epsilon", rational_to_json(rep.epsilon)},
           {"unit_price", rational_to_json(price)}};
    if (rep.worst_deviator) {
      j["worst_deviation"] = json{{"agent", rep.worst_deviator->agent},
                                  {"bid", rep.worst_deviator->bid}};
    }
    out << j.dump(2) << "\n";
    return rep.is_equilibrium ? kExitOk : kExitValidation;
  });
}

}  // namespace pbpc::harness
