#include <gtest/gtest.h>

#include "dsmv/dsm.hpp"
#include "dsmv/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dsmv;
using fixtures::data;
using fixtures::Fixture;
using fixtures::slurp;
using oracles::brute_force_holds;
using oracles::Point;

namespace {

DSMMap cert(const std::string& name) { return parse_dsm(slurp(data("certs/" + name + ".dsm"))); }

}  // namespace

TEST(Checker, HandMapForMiniRoulettePasses) {
  Fixture f("mini_roulette");
  CheckReport r = check_dsm(cert("mini_roulette_hand"), f.outer, f.inv);
  EXPECT_TRUE(r.pass()) << r.to_string(f.cfg.pvars);
  EXPECT_GT(r.obligations, 30u);
  EXPECT_TRUE(brute_force_holds(cert("mini_roulette_hand"), f.outer, f.inv, 10, 40));
}

// x := x + 2 at label 9 leads to label 11; the difference is a constant.
TEST(Checker, HandMapDifferenceAtLabelNine) {
  Fixture f("mini_roulette");
  DSMMap m = cert("mini_roulette_hand");
  const Transition& t = f.outer.transitions[f.outer.outgoing(9).at(0)];
  ASSERT_EQ(t.dst, 11);
  LinearExpr diff = expected_post(m.eta.at(11), t.update, f.cfg.rvars, f.cfg.dists) - m.eta.at(9);
  EXPECT_TRUE(diff.is_constant());
  EXPECT_EQ(diff.constant(), Rational(-4, 299));
}

TEST(Checker, ShippedCertificatesPass) {
  for (const char* name : {"mini_roulette", "program1", "program2"}) {
    Fixture f(name);
    DSMMap m = cert(name);
    CheckReport r = check_dsm(m, f.outer, f.inv);
    EXPECT_TRUE(r.pass()) << name << "\n" << r.to_string(f.cfg.pvars);
  }
  Fixture p1("program1");
  EXPECT_TRUE(brute_force_holds(cert("program1"), p1.outer, p1.inv, 6, 6));
}

// The exit of the innermost loop can leave b arbitrarily far below z, so the
// difference b - z on the arc 6 -> 9 has no lower bound.
TEST(Checker, ProgramThreeReferenceMapFailsAtTheInnerExit) {
  Fixture f("program3");
  CheckReport r = check_dsm(cert("program3"), f.outer, f.inv);
  ASSERT_FALSE(r.pass());
  const Violation& v = r.violations.front();
  EXPECT_EQ(v.cond, Condition::D2);
  EXPECT_EQ(v.label, 6);
  EXPECT_EQ(v.transition.substr(0, 4), "6->9");
  EXPECT_NE(v.what.find(">= a"), std::string::npos);
  EXPECT_FALSE(v.worst.has_value());
  EXPECT_FALSE(brute_force_holds(cert("program3"), f.outer, f.inv, 8, 8));
}

TEST(Checker, VerdictIsScaleInvariant) {
  for (const char* name : {"mini_roulette_hand", "program1", "program3"}) {
    std::string prog = std::string(name) == "mini_roulette_hand" ? "mini_roulette" : name;
    Fixture f(prog);
    bool base = check_dsm(cert(name), f.outer, f.inv).pass();
    for (Rational k : {Rational(1, 3), Rational(2), Rational(299)}) {
      EXPECT_EQ(check_dsm(cert(name).scaled(k), f.outer, f.inv).pass(), base) << name << " * " << k;
    }
  }
}

TEST(Checker, PerturbationsAreDetected) {
  Fixture f("program1");
  DSMMap m = cert("program1");
  m.eta[4] += LinearExpr(Rational(2));  // breaks the decrease from label 3
  CheckReport r = check_dsm(m, f.outer, f.inv);
  ASSERT_FALSE(r.pass());
  EXPECT_FALSE(brute_force_holds(m, f.outer, f.inv, 6, 6));

  DSMMap low = cert("program1");
  low.c = 100;  // lower bound at the entry cannot hold for x = 1
  CheckReport rl = check_dsm(low, f.outer, f.inv);
  ASSERT_FALSE(rl.pass());
  EXPECT_EQ(rl.violations.front().cond, Condition::D5);
  EXPECT_TRUE(check_partial_dsm(low, f.outer, f.inv).pass());
}

TEST(Checker, ViolationWitnessesLieInTheDomain) {
  Fixture f("program3");
  CheckReport r = check_dsm(cert("program3"), f.outer, f.inv);
  for (const auto& v : r.violations) EXPECT_TRUE(f.inv.of(v.label).contains(v.witness)) << v.label;
}

TEST(Checker, MissingLabelIsACoverageError) {
  Fixture f("program1");
  DSMMap m = cert("program1");
  m.eta.erase(5);
  EXPECT_THROW(check_dsm(m, f.outer, f.inv), CoverageError);
}

TEST(Certificate, RendersAndParsesBack) {
  DSMMap m = cert("mini_roulette_hand");
  DSMMap again = parse_dsm(m.render({"x", "y"}));
  EXPECT_EQ(again.eta, m.eta);
  EXPECT_EQ(again.epsilon, Rational(4, 299));
  EXPECT_EQ(again.a, Rational(-280, 299));
  EXPECT_EQ(again.c, 1);
  EXPECT_THROW(parse_dsm("eps 0\na 0\nb 1\nc 0\neta 1: x"), SemanticError);
  EXPECT_THROW(parse_dsm("eps 1\na 2\nb 1\nc 0\neta 1: x"), SemanticError);
  EXPECT_THROW(parse_dsm("eps 1\na 0\nb 1\nc 0\neta 1: x\neta 1: y"), SemanticError);
}

TEST(Invariant, LoadingRejectsUnknownAndDuplicateLabels) {
  Fixture f("program1");
  EXPECT_THROW(load_invariant("inv 99: x >= 0", f.cfg), UnknownLabelError);
  EXPECT_THROW(load_invariant("inv 2: x >= 0\ninv 2: x <= 3", f.cfg), SemanticError);
  Invariant inv = load_invariant("# comment\n\ninv 2: x >= 1\n", f.cfg);
  EXPECT_TRUE(inv.of(1).is_universe());
  EXPECT_FALSE(inv.of(2).contains({{"x", Rational(0)}}));
}

TEST(Invariant, GuardDefaultsFollowIncomingConditionalArcs) {
  CFG cfg = build_cfg(parse_program("while x >= 1 do x := x - 1 od"));
  Invariant inv = guard_default_invariant(cfg);
  EXPECT_TRUE(inv.of(1).is_universe());
  for (long x = -3; x <= 3; ++x) {
    Point p{{"x", Rational(x)}};
    EXPECT_EQ(inv.of(2).contains(p), x >= 1);
    EXPECT_EQ(inv.of(3).contains(p), x <= 0);
  }
}
