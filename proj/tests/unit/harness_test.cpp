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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pbpc/harness/atomic_file.hpp"
#include "pbpc/harness/builtins.hpp"
#include "pbpc/harness/commands.hpp"
#include "pbpc/harness/instance_io.hpp"
#include "pbpc/harness/manifest.hpp"
#include "pbpc/harness/report.hpp"
#include "support/random_instances.hpp"

namespace pbpc::harness {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("pbpc-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Builtins, AllValid) {
  for (const auto& name : builtin_names()) {
    MarketInstance inst = gen_builtin(name);
    EXPECT_TRUE(validate_instance(inst).ok()) << name;
    EXPECT_EQ(inst.name, name);
  }
  EXPECT_THROW(gen_builtin("fig1"), InvalidArgument);
}

TEST(Builtins, RegistryParameters) {
  MarketInstance fig3 = gen_builtin("fig3");
  EXPECT_EQ(fig3.num_agents(), 4);
  EXPECT_EQ(fig3.max_bid, 800);
  for (const auto& p : fig3.producers) {
    EXPECT_EQ(p.supply, make_rational(3, 10));
    EXPECT_EQ(p.cost, 0);
  }
  MarketInstance corpb = gen_builtin("cor-pb");
  EXPECT_EQ(corpb.max_bid, 5);
  EXPECT_EQ(corpb.producers[0].supply, make_rational(3, 4));
  MarketInstance sec31 = gen_builtin("sec31");
  EXPECT_EQ(sec31.max_bid, 6);
  EXPECT_EQ(sec31.producers[2].supply, make_rational(1, 10));
  EXPECT_EQ(sec31.producers[2].cost, 4);
  EXPECT_EQ(gen_builtin("fig7").producers[4].supply, make_rational(26, 100));
  EXPECT_EQ(canonical_instance_text(gen_builtin("fig6")),
            canonical_instance_text(gen_builtin("fig2")));
}

TEST(Builtins, VcgFamilySubstitution) {
  MarketInstance a = gen_vcg_family(2, 3);
  EXPECT_EQ(a.max_bid, 4);
  ASSERT_EQ(a.num_agents(), 3);
  EXPECT_EQ(a.producers[0].supply, make_rational(1, 2));
  EXPECT_EQ(a.producers[1].supply, make_rational(1, 2));
  EXPECT_EQ(a.producers[2].supply, make_rational(1, 4));
  EXPECT_EQ(a.producers[2].cost, 3);

  MarketInstance b = gen_vcg_family(3, 3);
  EXPECT_EQ(b.max_bid, 7);
  ASSERT_EQ(b.num_agents(), 5);
  std::vector<Rational> s;
  std::vector<int> c;
  for (const auto& p : b.producers) {
    s.push_back(p.supply);
    c.push_back(p.cost);
  }
  EXPECT_EQ(s, (std::vector<Rational>{make_rational(1, 3), make_rational(1, 3),
                                      make_rational(1, 3), make_rational(1, 6),
                                      make_rational(1, 18)}));
  EXPECT_EQ(c, (std::vector<int>{0, 0, 0, 3, 4}));

  for (int k = 2; k <= 20; ++k) {
    MarketInstance inst = gen_vcg_family(k, 5);
    EXPECT_TRUE(validate_instance(inst).ok());
    EXPECT_EQ(total_supply(inst),
              1 + make_rational(1, k) - make_rational(1, k * k));
  }
  EXPECT_THROW(gen_vcg_family(1, 3), InvalidArgument);
  EXPECT_THROW(gen_vcg_family(3, 2), InvalidArgument);
}

TEST(Builtins, BestPayAsClearFamily) {
  MarketInstance inst = gen_bestpc_family(3);
  EXPECT_EQ(inst.max_bid, 9);
  EXPECT_EQ(inst.producers[2].cost, 3);
  EXPECT_EQ(canonical_instance_text(gen_bestpc_family(300)),
            canonical_instance_text(gen_builtin("fig2")));
  EXPECT_THROW(gen_bestpc_family(0), InvalidArgument);
}

TEST(Builtins, GeneratorSpecs) {
  EXPECT_EQ(gen_instance("vcg:4,3").num_agents(), 7);
  EXPECT_EQ(gen_instance("bestpc:5").max_bid, 15);
  EXPECT_EQ(gen_instance("cor-pb:8").max_bid, 8);
  EXPECT_EQ(gen_instance("cor-pc:7").producers[1].cost, 7);
  EXPECT_THROW(gen_instance("vcg:4"), InvalidArgument);
  EXPECT_THROW(gen_instance("vcg:4,x"), InvalidArgument);
  EXPECT_THROW(gen_instance("nope:1"), InvalidArgument);
}

TEST(InstanceIo, RoundTripIsExact) {
  std::mt19937_64 rng(50);
  testing::RandomInstanceSpec spec;
  spec.max_denominator = 97;
  spec.max_agents = 7;
  for (int t = 0; t < 300; ++t) {
    MarketInstance inst = testing::random_instance(rng, spec);
    MarketInstance back = instance_from_json(instance_to_json(inst));
    EXPECT_EQ(back.name, inst.name);
    EXPECT_EQ(back.max_bid, inst.max_bid);
    ASSERT_EQ(back.num_agents(), inst.num_agents());
    for (int i = 0; i < inst.num_agents(); ++i) {
      EXPECT_EQ(back.supply(i), inst.supply(i));
      EXPECT_EQ(back.cost(i), inst.cost(i));
    }
    EXPECT_EQ(instance_digest(back), instance_digest(inst));
  }
}

TEST(InstanceIo, FileRoundTrip) {
  TempDir dir;
  MarketInstance inst = gen_builtin("example1");
  fs::path p = dir.path() / "e1.json";
  save_instance(p, inst);
  MarketInstance back = load_instance(p);
  EXPECT_EQ(canonical_instance_text(back), canonical_instance_text(inst));
  EXPECT_EQ(back.supply(0), make_rational(1, 3));
  EXPECT_EQ(back.supply(3), make_rational(2, 3));
}

TEST(InstanceIo, AcceptsDecimalAndObjectForms) {
  json j = json::parse(R"({
    "max_bid": 800,
    "producers": [{"supply": 0.3, "cost": 0}, ["0.3", 0], [[3, 10], 0],
                  [3, 10, 0]]})");
  MarketInstance inst = instance_from_json(j);
  for (const auto& p : inst.producers) EXPECT_EQ(p.supply, make_rational(3, 10));
}

TEST(InstanceIo, ReportsAllProblemsTogether) {
  json j = json::parse(R"({"max_bid": 3,
    "producers": [[1, 4, 5], [1, 4, -1]]})");
  try {
    instance_from_json(j);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.problems().size(), 3u);
  }
  EXPECT_THROW(instance_from_json(json::parse(R"({"producers": []})")),
               ParseError);
  EXPECT_THROW(instance_from_json(json::parse(R"({"max_bid": 3,
    "producers": [[1, 0, 0]]})")), ParseError);
}

TEST(InstanceIo, ShortSupplyFileFailsValidation) {
  TempDir dir;
  fs::path p = dir.path() / "short.json";
  std::ofstream(p) << R"({"max_bid": 3, "producers": [[1, 4, 0], [1, 2, 1]]})";
  EXPECT_THROW(load_instance(p), ValidationError);
}

TEST(Digest, ChangesExactlyWithContent) {
  MarketInstance a = gen_builtin("sec31");
  MarketInstance b = a;
  b.name = "renamed";
  EXPECT_EQ(instance_digest(a), instance_digest(b));
  b.producers[0].cost = 1;
  EXPECT_NE(instance_digest(a), instance_digest(b));
  b = a;
  b.producers[2].supply = make_rational(1, 9);
  EXPECT_NE(instance_digest(a), instance_digest(b));
  b = a;
  b.max_bid = 7;
  EXPECT_NE(instance_digest(a), instance_digest(b));
  // Stable across runs: SHA-256 of the canonical text.
  EXPECT_EQ(canonical_instance_text(a), "max_bid=6;3/4@0;3/4@1;1/10@4");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Profiles, PureAndMixedForms) {
  ProfileFile a = profile_from_json(json::parse(R"({"bids": [0, 6, 4]})"));
  ASSERT_TRUE(a.pure.has_value());
  EXPECT_EQ(*a.pure, (BidProfile{0, 6, 4}));
  ProfileFile b = profile_from_json(json::parse(
      R"({"mixed": [{"2": "1/2", "3": "1/2"}, [[4, 1]]]})"));
  ASSERT_TRUE(b.mixed.has_value());
  EXPECT_EQ((*b.mixed)[0].at(2), make_rational(1, 2));
  EXPECT_EQ((*b.mixed)[1].at(4), Rational(1));
  ProfileFile c =
      profile_from_json(json{{"mixed", mixed_profile_to_json(*b.mixed)}});
  EXPECT_EQ(*c.mixed, *b.mixed);
  EXPECT_THROW(profile_from_json(json::parse(R"({"x": 1})")), ParseError);
}

TEST(Files, AtomicWriteAndRollback) {
  TempDir dir;
  fs::path keep = dir.path() / "a" / "keep.txt";
  write_file_atomic(keep, "hello");
  EXPECT_EQ(slurp(keep), "hello");
  write_file_atomic(keep, "again");
  EXPECT_EQ(slurp(keep), "again");
  fs::path gone = dir.path() / "gone.txt";
  {
    OutputSet out;
    out.write(gone, "x");
    EXPECT_TRUE(fs::exists(gone));
  }
  EXPECT_FALSE(fs::exists(gone));
  {
    OutputSet out;
    out.write(gone, "x");
    out.commit();
  }
  EXPECT_TRUE(fs::exists(gone));
  for (const auto& e : fs::directory_iterator(dir.path() / "a")) {
    EXPECT_EQ(e.path().filename(), "keep.txt");
  }
}

TEST(Report, TrajectoryCsvFormat) {
  Trajectory t;
  t.records.push_back({1, 266.5, 266.5 / 800, 266.5});
  t.records.push_back({2, 800, 1, 533.25});
  EXPECT_EQ(trajectory_csv(t),
            "iteration,unit_price,normalized_unit_price,time_avg_unit_price\n"
            "1,266.5,0.333125,266.5\n"
            "2,800,1,533.25\n");
}

TEST(Manifest, RoundTrip) {
  RunManifest m;
  m.instance_digest = "sha256:00";
  m.instance = instance_to_json(gen_builtin("fig3"));
  m.config.mechanism = Mechanism::PayAsBid;
  m.config.iterations = 20000;
  m.config.seed = 7;
  m.config.learning_rate = 0.05;
  m.outputs = {"a.csv"};
  RunManifest back = RunManifest::from_json(m.to_json());
  EXPECT_EQ(back.config.mechanism, Mechanism::PayAsBid);
  EXPECT_EQ(back.config.iterations, 20000u);
  EXPECT_EQ(back.config.seed, 7u);
  ASSERT_TRUE(back.config.learning_rate.has_value());
  EXPECT_DOUBLE_EQ(*back.config.learning_rate, 0.05);
  EXPECT_EQ(back.outputs, m.outputs);
  MarketInstance inst = instance_from_json(back.instance);
  EXPECT_EQ(inst.num_agents(), 4);
}

TEST(Commands, AnalyzeFigureThree) {
  std::ostringstream out, err;
  AnalyzeOptions o;
  o.instance = "fig3";
  ASSERT_EQ(cmd_analyze(o, out, err), kExitOk) << err.str();
  json j = json::parse(out.str());
  EXPECT_EQ(j["pc_pure_price"], 800);
  EXPECT_EQ(j["pc_floor"], 267);
  EXPECT_EQ(j["pb_interval"], json::array({266, 800}));
  EXPECT_EQ(j["truthful"]["pc"]["unit_price"], 0);
}

TEST(Commands, EnumerateTwoLargeSellers) {
  std::ostringstream out, err;
  EnumerateOptions o;
  o.instance = "cor-pb";
  o.mechanism = Mechanism::PayAsBid;
  ASSERT_EQ(cmd_enumerate(o, out, err), kExitOk) << err.str();
  EXPECT_EQ(json::parse(out.str())["count"], 0);
  std::ostringstream out2;
  o.mixed_2p = true;
  ASSERT_EQ(cmd_enumerate(o, out2, err), kExitOk) << err.str();
  json j = json::parse(out2.str());
  EXPECT_EQ(j["count"], 1);
  EXPECT_EQ(j["equilibria"][0]["expected_unit_price"], "11/4");
}

TEST(Commands, SimulateIsByteIdentical) {
  TempDir dir;
  SimulateOptions o;
  o.instance = "fig3";
  o.config.mechanism = Mechanism::PayAsBid;
  o.config.iterations = 2000;
  o.config.seed = 7;
  std::ostringstream out, err;
  o.out = (dir.path() / "a.csv").string();
  ASSERT_EQ(cmd_simulate(o, out, err), kExitOk) << err.str();
  o.out = (dir.path() / "b.csv").string();
  o.config.workers = 4;
  ASSERT_EQ(cmd_simulate(o, out, err), kExitOk) << err.str();
  std::string a = slurp(dir.path() / "a.csv");
  EXPECT_EQ(a, slurp(dir.path() / "b.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "iteration,unit_price,normalized_unit_price,time_avg_unit_price");
  json man = json::parse(slurp(dir.path() / "a.csv.manifest.json"));
  EXPECT_EQ(man["instance_digest"], instance_digest(gen_builtin("fig3")));
  EXPECT_EQ(man["config"]["seed"], 7);
  EXPECT_EQ(man["tool_version"], kToolVersion);
}

TEST(Commands, ManifestReproducesRun) {
  TempDir dir;
  SimulateOptions o;
  o.instance = "sec31";
  o.config.mechanism = Mechanism::PayAsClear;
  o.config.iterations = 300;
  o.config.seed = 4;
  o.out = (dir.path() / "run.csv").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_simulate(o, out, err), kExitOk);
  RunManifest m = RunManifest::from_json(
      read_json_file(dir.path() / "run.csv.manifest.json"));
  MarketInstance inst = instance_from_json(m.instance);
  EXPECT_EQ(instance_digest(inst), m.instance_digest);
  EXPECT_EQ(trajectory_csv(run_simulation(inst, m.config)),
            slurp(dir.path() / "run.csv"));
}

TEST(Commands, ReproduceWritesPairedRuns) {
  TempDir dir;
  ReproduceOptions o;
  o.figure = "fig4";
  o.out_dir = (dir.path() / "out").string();
  o.iterations = 200;
  o.seeds = {1, 2};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_reproduce(o, out, err), kExitOk) << err.str();
  for (const char* f : {"fig4-pb-seed1.csv", "fig4-pc-seed1.csv",
                        "fig4-pb-seed2.csv", "fig4-pc-seed2.csv",
                        "fig4-pb-seed1.csv.manifest.json", "fig4-bounds.json",
                        "fig4-summary.json"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "out" / f)) << f;
  }
  json s = read_json_file(dir.path() / "out" / "fig4-summary.json");
  EXPECT_EQ(s["runs"].size(), 4u);
  EXPECT_EQ(s["pc_pure_price"], 800);
}

TEST(Commands, FailedReproduceLeavesNoFiles) {
  TempDir dir;
  ReproduceOptions o;
  o.figure = "fig4";
  o.out_dir = (dir.path() / "out").string();
  o.iterations = 0;  // rejected after the bounds file is written
  std::ostringstream out, err;
  EXPECT_EQ(cmd_reproduce(o, out, err), kExitUsage);
  bool any = false;
  if (fs::exists(dir.path() / "out")) {
    for (const auto& e : fs::recursive_directory_iterator(dir.path() / "out")) {
      any = any || e.is_regular_file();
    }
  }
  EXPECT_FALSE(any);
}

TEST(Commands, GenAndVerify) {
  TempDir dir;
  std::ostringstream out, err;
  GenOptions g;
  g.spec = "sec31";
  g.out = (dir.path() / "sec31.json").string();
  ASSERT_EQ(cmd_gen(g, out, err), kExitOk);
  std::ofstream(dir.path() / "ne.json") << R"({"bids": [0, 6, 4]})";
  std::ofstream(dir.path() / "truth.json") << R"({"bids": [0, 1, 4]})";
  VerifyOptions v;
  v.instance = g.out;
  v.mechanism = Mechanism::PayAsClear;
  v.profile = (dir.path() / "ne.json").string();
  std::ostringstream o1;
  EXPECT_EQ(cmd_verify(v, o1, err), kExitOk);
  EXPECT_EQ(json::parse(o1.str())["is_equilibrium"], true);
  v.profile = (dir.path() / "truth.json").string();
  std::ostringstream o2;
  EXPECT_EQ(cmd_verify(v, o2, err), kExitValidation);
  EXPECT_EQ(json::parse(o2.str())["is_equilibrium"], false);
}

TEST(Commands, ExitCodes) {
  std::ostringstream out, err;
  AnalyzeOptions a;
  a.instance = "no-such-thing";
  EXPECT_EQ(cmd_analyze(a, out, err), kExitUsage);
  EnumerateOptions e;
  e.instance = "fig3";
  EXPECT_EQ(cmd_enumerate(e, out, err), kExitBudget);
  TempDir dir;
  std::ofstream(dir.path() / "bad.json") << R"({"max_bid": 3, "producers": [[1, 4, 0]]})";
  a.instance = (dir.path() / "bad.json").string();
  EXPECT_EQ(cmd_analyze(a, out, err), kExitValidation);
  std::ofstream(dir.path() / "broken.json") << "{";
  a.instance = (dir.path() / "broken.json").string();
  EXPECT_EQ(cmd_analyze(a, out, err), kExitValidation);
}

}  // namespace
}  // namespace pbpc::harness
