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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pbpc/harness/builtins.hpp"
#include "pbpc/harness/commands.hpp"
#include "pbpc/harness/manifest.hpp"
#include "pbpc/harness/terminal.hpp"

namespace {

using namespace pbpc;
using namespace pbpc::harness;

// CLI11 validator turning "pb"/"pc"/"vcg" into a Mechanism.
void add_mechanism_option(CLI::App* cmd, Mechanism* target, bool required) {
  auto* opt = cmd->add_option_function<std::string>(
      "--mech",
      [target](const std::string& text) { *target = parse_mechanism(text); },
      "pricing rule: pb, pc or vcg");
  opt->check(CLI::IsMember({"pb", "pc", "vcg"}));
  if (required) opt->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pbpc: pay-as-bid, pay-as-clear and VCG procurement auctions"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  const bool color = use_color(stderr);
  int status = kExitOk;

  // analyze
  AnalyzeOptions analyze;
  auto* c_analyze = app.add_subcommand(
      "analyze", "bounds, pure equilibrium construction and truthful outcomes");
  c_analyze->add_option("instance", analyze.instance,
                        "instance file, builtin name or generator spec")
      ->required();
  c_analyze->add_option("--out", analyze.out, "output file (default stdout)");
  c_analyze->add_option("--b-high-method", analyze.method,
                        "auto, exhaustive or pruned")
      ->check(CLI::IsMember({"auto", "exhaustive", "pruned"}));
  c_analyze->add_option("--node-budget", analyze.node_budget,
                        "search node budget for the pruned method");
  c_analyze->callback(
      [&] { status = cmd_analyze(analyze, std::cout, std::cerr); });

  // simulate
  SimulateOptions simulate;
  std::optional<double> eta;
  std::string feedback = "sampled";
  auto* c_sim = app.add_subcommand("simulate", "Hedge bidding dynamics");
  c_sim->add_option("instance", simulate.instance)->required();
  add_mechanism_option(c_sim, &simulate.config.mechanism, true);
  c_sim->add_option("--iters", simulate.config.iterations, "iterations")
      ->required();
  c_sim->add_option("--seed", simulate.config.seed, "random seed")->required();
  c_sim->add_option("--eta", eta, "learning rate (default tuned to --iters)");
  c_sim->add_option("--snapshot-every", simulate.config.snapshot_every,
                    "record every K iterations");
  c_sim->add_option("--feedback", feedback, "sampled or exact")
      ->check(CLI::IsMember({"sampled", "exact"}));
  c_sim->add_option("--workers", simulate.config.workers,
                    "threads for per-agent updates (results do not depend on it)");
  c_sim->add_option("--out", simulate.out,
                    "CSV path, '-' for stdout (default <name>-<mech>-seed<S>.csv)");
  c_sim->add_flag("!--no-manifest", simulate.write_manifest,
                  "skip FILE.manifest.json");
  c_sim->callback([&] {
    simulate.config.learning_rate = eta;
    simulate.config.feedback = parse_feedback(feedback);
    status = cmd_simulate(simulate, std::cout, std::cerr);
  });

  // enumerate
  EnumerateOptions enumerate;
  bool pure = false;
  bool mixed = false;
  auto* c_enum = app.add_subcommand("enumerate", "enumerate equilibria");
  c_enum->add_option("instance", enumerate.instance)->required();
  auto* f_pure = c_enum->add_flag("--pure", pure, "all pure equilibria");
  auto* f_mixed = c_enum->add_flag("--mixed2p", mixed,
                                   "all extreme mixed equilibria of a 2-agent game");
  f_pure->excludes(f_mixed);
  add_mechanism_option(c_enum, &enumerate.mechanism, true);
  c_enum->add_option("--out", enumerate.out, "output file (default stdout)");
  c_enum->add_option("--profile-budget", enumerate.profile_budget,
                     "maximum number of pure profiles to scan");
  c_enum->add_option("--max-support", enumerate.max_support,
                     "largest support size for --mixed2p (0: no limit)");
  c_enum->callback([&] {
    if (!pure && !mixed) {
      std::cerr << "error: one of --pure or --mixed2p is required\n";
      status = kExitUsage;
      return;
    }
    enumerate.mixed_2p = mixed;
    status = cmd_enumerate(enumerate, std::cout, std::cerr);
  });

  // reproduce
  ReproduceOptions reproduce;
  auto* c_rep = app.add_subcommand(
      "reproduce", "figure data: bounds plus paired pay-as-bid/pay-as-clear runs");
  c_rep->add_option("figure", reproduce.figure)
      ->required()
      ->check(CLI::IsMember(reproducible_figures()));
  c_rep->add_option("--out", reproduce.out_dir, "output directory")->required();
  c_rep->add_option("--seeds", reproduce.seeds, "seeds (default 1)");
  c_rep->add_option("--iters", reproduce.iterations, "iterations per run");
  c_rep->add_option("--snapshot-every", reproduce.snapshot_every);
  c_rep->add_option("--workers", reproduce.workers);
  c_rep->callback(
      [&] { status = cmd_reproduce(reproduce, std::cout, std::cerr); });

  // gen
  GenOptions gen;
  auto* c_gen = app.add_subcommand("gen", "write an instance file");
  c_gen->add_option("spec", gen.spec, "builtin name, vcg:k,delta or bestpc:delta")
      ->required();
  c_gen->add_option("--out", gen.out, "output file (default stdout)");
  c_gen->callback([&] { status = cmd_gen(gen, std::cout, std::cerr); });

  // verify
  VerifyOptions verify;
  auto* c_ver = app.add_subcommand("verify", "check a pure or mixed profile");
  c_ver->add_option("instance", verify.instance)->required();
  c_ver->add_option("--profile", verify.profile, "profile JSON file")
      ->required();
  add_mechanism_option(c_ver, &verify.mechanism, true);
  c_ver->add_option("--tolerance", verify.tolerance,
                    "allowed deviation gain, exact (e.g. 0, 1/100)");
  c_ver->callback([&] { status = cmd_verify(verify, std::cout, std::cerr); });

  // list
  auto* c_list = app.add_subcommand("list", "builtin instance names");
  c_list->callback([&] {
    for (const auto& e : builtin_registry()) {
      std::cout << e.name << "\t" << e.description << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << red("error: ", color) << e.what() << "\n"
              << "run with --help for usage\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    // Errors thrown from option callbacks (e.g. parse_mechanism).
    std::cerr << red("error: ", color) << e.what() << "\n";
    return kExitUsage;
  }
  return status;
}
