#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "json.hpp"

using fixtures::data;
using fixtures::slurp;
using nlohmann::json;

namespace {

struct CliResult {
  int code;
  std::string out;
};

CliResult cli(const std::string& args) {
  std::string cmd = std::string(DSMV_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string prog(const std::string& name) { return data("programs/" + name + ".pp"); }

std::string inv_flag(const std::string& name) {
  std::string path = data("inv/" + name + ".inv");
  return fixtures::exists(path) ? " --inv " + path : "";
}

std::string scratch(const std::string& name, const std::string& content = "") {
  auto dir = std::filesystem::temp_directory_path() / ("dsmv_cli_" + std::to_string(getpid()));
  std::filesystem::create_directories(dir);
  std::string path = (dir / name).string();
  if (!content.empty()) std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(Cli, ProveExitCodes) {
  for (const char* name : {"program1", "program2", "mini_roulette", "nested_walk", "ber", "bin", "geo", "sprdwalk",
                           "rdwalk"}) {
    EXPECT_EQ(cli("prove " + prog(name) + inv_flag(name)).code, 0) << name;
  }
  EXPECT_EQ(cli("prove " + prog("counterexample") + inv_flag("counterexample")).code, 1);
  EXPECT_EQ(cli("prove " + prog("program3") + inv_flag("program3")).code, 1);
}

TEST(Cli, SynthAndCheckExitCodes) {
  EXPECT_EQ(cli("synth " + prog("program1") + inv_flag("program1")).code, 0);
  EXPECT_EQ(cli("synth " + prog("counterexample") + inv_flag("counterexample")).code, 1);
  EXPECT_EQ(cli("synth " + prog("program3") + inv_flag("program3") + " --all-loops").code, 1);
  for (const char* name : {"program1", "program2", "mini_roulette"}) {
    EXPECT_EQ(cli("check " + prog(name) + inv_flag(name) + " --cert " + data(std::string("certs/") + name + ".dsm"))
                  .code,
              0)
        << name;
  }
  EXPECT_EQ(cli("check " + prog("mini_roulette") + inv_flag("mini_roulette") + " --cert " +
                 data("certs/mini_roulette_hand.dsm"))
                .code,
            0);
  EXPECT_EQ(cli("check " + prog("program3") + inv_flag("program3") + " --cert " + data("certs/program3.dsm")).code,
            1);
}

TEST(Cli, DerivationExitCodes) {
  std::string drv = data("derivations/nested_walk.drv");
  EXPECT_EQ(cli("check-derivation " + drv).code, 0);
  std::string text = slurp(drv);
  std::string bad = text;
  bad.replace(bad.find("post 6*y + 2"), 12, "post 6*y + 3");
  EXPECT_EQ(cli("check-derivation " + scratch("mutant.drv", bad)).code, 1);
  std::string broken = text;
  broken.replace(broken.find("premises i, ii"), 14, "premises i, zz");
  EXPECT_EQ(cli("check-derivation " + scratch("broken.drv", broken)).code, 2);
}

TEST(Cli, InputErrorsExitWithTwo) {
  EXPECT_EQ(cli("prove " + data("programs/missing.pp")).code, 2);
  EXPECT_EQ(cli("synth " + data("programs/missing.pp")).code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("check " + prog("program1")).code, 2);  // --cert is required
  EXPECT_EQ(cli("synth " + scratch("nonlinear.pp", "x := x * y")).code, 2);
  EXPECT_EQ(cli("sim " + prog("program1") + " --init x=1,q=2 --seed 1").code, 2);
  EXPECT_EQ(cli("analyze-ce --y0 3 --k 2 --runs 10 --seed 1").code, 2);
  EXPECT_EQ(cli("prove " + prog("program1") + " --inv " + scratch("bad.inv", "inv 99: x >= 0")).code, 2);
}

TEST(Cli, JsonReportsHaveTheDocumentedFields) {
  json proved = json::parse(cli("--format json prove " + prog("program1") + inv_flag("program1")).out);
  EXPECT_EQ(proved["result"], "Proved");
  EXPECT_EQ(proved["loops_decided"], json::array({3, 1}));
  EXPECT_EQ(proved["loops"]["1"]["eta"]["1"], "6*x + 5");

  json synth = json::parse(cli("--format json synth " + prog("ber")).out);
  ASSERT_EQ(synth["results"].size(), 1u);
  EXPECT_EQ(synth["results"][0]["result"], "Success");
  EXPECT_EQ(synth["results"][0]["interval"], json::array({"-3", "1"}));

  json check = json::parse(cli("--format json check " + prog("program3") + inv_flag("program3") + " --cert " +
                                data("certs/program3.dsm"))
                               .out);
  EXPECT_EQ(check["result"], "fail");
  EXPECT_EQ(check["violations"][0]["condition"], "D2");
  EXPECT_EQ(check["violations"][0]["transition"], "6->9");
  EXPECT_EQ(check["violations"][0]["worst"], "unbounded");

  json drv = json::parse(cli("--format json check-derivation " + data("derivations/nested_walk.drv")).out);
  EXPECT_EQ(drv["result"], "Valid");
  EXPECT_EQ(drv["steps"], 26);
  EXPECT_EQ(drv["effective"]["a"], "-100");

  json ce = json::parse(cli("--format json analyze-ce --y0 10 --k 2 --runs 200 --seed 5").out);
  for (const char* key : {"d_upper", "bound", "absorption", "survivors", "wilson95", "agrees"}) {
    EXPECT_TRUE(ce.contains(key)) << key;
  }
}

TEST(Cli, SimulationOutputIsByteDeterministic) {
  std::string args = "--format json sim " + prog("program1") + " --init x=3,y=2 --runs 200 --seed 8";
  CliResult a = cli(args);
  CliResult b = cli(args + " --threads 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  json j = json::parse(a.out);
  EXPECT_EQ(j["runs"], 200);
  EXPECT_EQ(j["terminated"].get<int>() + j["censored"].get<int>(), 200);
}

TEST(Cli, DumpedLinearProgramsAreByteEqual) {
  std::string first = scratch("first.lp"), second = scratch("second.lp");
  ASSERT_EQ(cli("synth " + prog("mini_roulette") + inv_flag("mini_roulette") + " --dump-lp " + first).code, 0);
  ASSERT_EQ(cli("synth " + prog("mini_roulette") + inv_flag("mini_roulette") + " --dump-lp " + second).code, 0);
  std::string text = slurp(first);
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(second));
}

TEST(Cli, EmittedCertificateChecks) {
  std::string cert = scratch("program2.dsm");
  ASSERT_EQ(cli("synth " + prog("program2") + inv_flag("program2") + " --emit-cert " + cert).code, 0);
  EXPECT_EQ(cli("check " + prog("program2") + inv_flag("program2") + " --cert " + cert).code, 0);
}
