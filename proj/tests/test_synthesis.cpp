#include <chrono>

#include <gtest/gtest.h>

#include "dsmv/errors.hpp"
#include "dsmv/synthesis.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dsmv;
using fixtures::data;
using fixtures::Fixture;
using fixtures::slurp;
using oracles::brute_force_holds;

namespace {

struct Timed {
  SynthesisOutcome outcome;
  double seconds;
};

Timed synth(const CFG& loop, const Invariant& inv, SynthesisOptions opts = {}) {
  auto t0 = std::chrono::steady_clock::now();
  SynthesisOutcome out = synthesize_dsm(loop, restrict_to(inv, loop), opts);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(out), s};
}

Rational width(const DSMMap& m) { return m.b - m.a; }

}  // namespace

// Outer loops of the four benchmark programs: every synthesized map must pass the exact
// checker and the pointwise oracle, with the fixed parameters eps = 1 and c = 0.
TEST(Synthesis, BenchmarkOuterLoops) {
  struct Case {
    const char* name;
    long lo, hi;
  };
  for (Case c : {Case{"mini_roulette", 10, 40}, Case{"program1", 6, 6}, Case{"program2", 4, 4},
                 Case{"program3", 3, 3}}) {
    Fixture f(c.name);
    Timed t = synth(f.outer, f.inv);
    ASSERT_TRUE(t.outcome.success()) << c.name << ": " << t.outcome.message;
    const DSMMap& m = t.outcome.map;
    EXPECT_LT(t.seconds, 2.0) << c.name;
    EXPECT_EQ(m.epsilon, 1);
    EXPECT_EQ(m.c, 0);
    EXPECT_GE(m.b, m.a + 1);
    EXPECT_TRUE(t.outcome.self_check.pass());
    EXPECT_TRUE(check_dsm(m, f.outer, f.inv).pass()) << c.name;
    EXPECT_TRUE(brute_force_holds(m, f.outer, f.inv, c.lo, c.hi)) << c.name;
  }
}

// The LP minimizes b - a, so any valid shipped map bounds the optimum from above.
TEST(Synthesis, WidthIsAtMostThatOfValidShippedMaps) {
  for (const char* name : {"mini_roulette", "program1", "program2"}) {
    Fixture f(name);
    DSMMap shipped = parse_dsm(slurp(data(std::string("certs/") + name + ".dsm")));
    ASSERT_TRUE(check_dsm(shipped, f.outer, f.inv).pass()) << name;
    Timed t = synth(f.outer, f.inv);
    ASSERT_TRUE(t.outcome.success());
    EXPECT_LE(width(t.outcome.map), width(shipped)) << name;
  }
}

TEST(Synthesis, SmallBenchmarksMatchKnownMaps) {
  struct Case {
    const char* name;
    const char* eta;
    int a, b;
  };
  for (Case c : {Case{"ber", "4*n - 4*x + 1", -3, 1}, Case{"sprdwalk", "4*n - 4*x + 1", -3, 1},
                 Case{"bin", "2/5*n - 2/5*x + 1", -3, 1}}) {
    Fixture f(c.name);
    Timed t = synth(f.outer, f.inv);
    ASSERT_TRUE(t.outcome.success()) << c.name;
    EXPECT_EQ(t.outcome.map.eta.at(f.outer.l_in), parse_linear_expr(c.eta)) << c.name;
    EXPECT_EQ(t.outcome.map.a, c.a) << c.name;
    EXPECT_EQ(t.outcome.map.b, c.b) << c.name;
    EXPECT_LT(t.seconds, 2.0);
  }
  for (const char* name : {"geo", "rdwalk"}) {
    Fixture f(name);
    Timed t = synth(f.outer, f.inv);
    ASSERT_TRUE(t.outcome.success()) << name;
    EXPECT_TRUE(brute_force_holds(t.outcome.map, f.outer, f.inv, 8, 8)) << name;
  }
}

TEST(Synthesis, InnerLoops) {
  Fixture p1("program1");
  CFG inner = loop_subcfg(p1.cfg, p1.forest[0].children[0]);
  Timed t = synth(inner, p1.inv);
  ASSERT_TRUE(t.outcome.success());
  EXPECT_TRUE(brute_force_holds(t.outcome.map, inner, p1.inv, 6, 6));

  // Each iteration of Program 3's middle loop runs the innermost loop z + 1 times, so the
  // drift per iteration grows with z and no linear map exists.
  Fixture p3("program3");
  CFG middle = loop_subcfg(p3.cfg, p3.forest[0].children[0]);
  EXPECT_EQ(middle.l_in, 3);
  Timed m = synth(middle, p3.inv);
  EXPECT_FALSE(m.outcome.success());
  EXPECT_EQ(m.outcome.reason, SynthesisOutcome::Reason::LPInfeasible);
}

TEST(Synthesis, CounterexampleIsInfeasible) {
  Fixture f("counterexample");
  Timed t = synth(f.outer, f.inv);
  EXPECT_FALSE(t.outcome.success());
  EXPECT_EQ(t.outcome.reason, SynthesisOutcome::Reason::LPInfeasible);
  EXPECT_EQ(to_string(t.outcome.reason), "lp-infeasible");
}

TEST(Synthesis, EmptyEntryInvariantIsReported) {
  Fixture f("program1");
  Invariant empty = load_invariant("inv 1: x >= 1 and x <= 0", f.cfg);
  Timed t = synth(f.outer, empty);
  EXPECT_FALSE(t.outcome.success());
  EXPECT_EQ(t.outcome.reason, SynthesisOutcome::Reason::EmptyInvariant);
}

TEST(Synthesis, LinearProgramTextIsDeterministic) {
  Fixture f("mini_roulette");
  Invariant inv = restrict_to(f.inv, f.outer);
  std::string once = assemble_lp(Template::for_loop(f.outer), f.outer, inv).to_text();
  std::string twice = assemble_lp(Template::for_loop(f.outer), f.outer, inv).to_text();
  EXPECT_EQ(once, twice);
  SynthesisOptions keep;
  keep.keep_lp_text = true;
  Timed t = synth(f.outer, f.inv, keep);
  EXPECT_EQ(t.outcome.lp_text, once);
  EXPECT_GT(t.outcome.lp_rows, 100u);
  EXPECT_NE(once.find("[interval]"), std::string::npos);
}
