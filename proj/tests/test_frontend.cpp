#include <gtest/gtest.h>

#include "dsmv/cfg.hpp"
#include "dsmv/errors.hpp"
#include "dsmv/frontend.hpp"
#include "fixtures.hpp"

using namespace dsmv;
using fixtures::data;
using fixtures::slurp;

namespace {

const std::vector<std::string> kFixtures = {"counterexample", "mini_roulette", "program1", "program2", "program3",
                                            "nested_walk", "ber", "bin", "geo", "sprdwalk", "rdwalk"};

const Transition& only_arc(const CFG& cfg, Label l) {
  auto out = cfg.outgoing(l);
  EXPECT_EQ(out.size(), 1u);
  return cfg.transitions[out.front()];
}

}  // namespace

TEST(Parser, CounterexampleLabelsFollowSourceOrder) {
  auto prog = parse_program(slurp(data("programs/counterexample.pp")));
  EXPECT_EQ(prog.terminal, 10);
  EXPECT_EQ(prog.pvars, (std::vector<std::string>{"x", "z", "y"}));
  EXPECT_EQ(prog.rvars, (std::vector<std::string>{"r"}));
  ASSERT_EQ(prog.labels.size(), 9u);
  EXPECT_NE(prog.labels.at(1)->as<WhileStmt>(), nullptr);
  EXPECT_NE(prog.labels.at(3)->as<WhileStmt>(), nullptr);
  EXPECT_NE(prog.labels.at(4)->as<IfStmt>(), nullptr);
  EXPECT_NE(prog.labels.at(6)->as<SkipStmt>(), nullptr);
  EXPECT_EQ(prog.labels.at(8)->as<AssignStmt>()->var, "y");
  EXPECT_EQ(prog.dists.at("r").expectation(), 0);
}

TEST(Parser, RoundTripsEveryFixture) {
  for (const auto& name : kFixtures) {
    auto prog = parse_program(slurp(data("programs/" + name + ".pp")));
    auto again = parse_program(to_source(prog));
    EXPECT_TRUE(same_structure(*prog.root, *again.root)) << name;
    EXPECT_EQ(to_source(prog), to_source(again)) << name;
    EXPECT_EQ(prog.terminal, again.terminal) << name;
  }
}

TEST(Parser, SyntaxErrorsCarryPositions) {
  try {
    parse_program("while x >= 1 do\n  x := x - \nod");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_program("while x >= 1 do x := x - 1"), SyntaxError);
  EXPECT_THROW(parse_program("x := 1 od"), SyntaxError);
}

TEST(Parser, RejectsNonlinearPrograms) {
  EXPECT_THROW(parse_program("x := x * y"), NonlinearError);
  EXPECT_THROW(parse_program("while x * y >= 1 do skip od"), NonlinearError);
}

TEST(Parser, RejectsMisusedSamplingVariables) {
  EXPECT_THROW(parse_program("dist r = {0: 1/2, 1: 1/2}; r := 1"), SemanticError);
  EXPECT_THROW(parse_program("dist r = {0: 1/2, 1: 1/2}; while r >= 1 do skip od"), SemanticError);
}

TEST(Parser, ValidatesDistributions) {
  EXPECT_THROW(parse_program("dist r = {0: 1/2, 1: 1/3}; x := r"), SemanticError);
  EXPECT_THROW(parse_program("dist r = {0: 1/2, 0: 1/2}; x := r"), SemanticError);
  EXPECT_THROW(parse_program("dist r = {0: 0, 1: 1}; x := r"), SemanticError);
  EXPECT_THROW(parse_program("dist r = {1: 1}; dist r = {1: 1}; x := r"), SemanticError);
}

TEST(Parser, AcceptsEveryBranchForm) {
  auto prog = parse_program(
      "if prob(1/3) then x := 1 else x := 2 fi;"
      "if * then skip else y := x fi;"
      "if x <= 1 and not (y == 2) then skip else skip fi");
  auto items = flatten(prog.root);
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items[0]->as<IfStmt>()->kind, BranchKind::Prob);
  EXPECT_EQ(items[0]->as<IfStmt>()->prob, Rational(1, 3));
  EXPECT_EQ(items[1]->as<IfStmt>()->kind, BranchKind::Star);
  EXPECT_EQ(items[2]->as<IfStmt>()->kind, BranchKind::Guard);
}

TEST(CFG, CounterexampleShape) {
  auto cfg = build_cfg(parse_program(slurp(data("programs/counterexample.pp"))));
  EXPECT_EQ(cfg.l_in, 1);
  EXPECT_EQ(cfg.l_out, 10);
  EXPECT_EQ(cfg.kind(1), LabelKind::Branch);
  EXPECT_EQ(cfg.kind(4), LabelKind::Branch);
  EXPECT_EQ(cfg.kind(5), LabelKind::Assign);
  EXPECT_EQ(cfg.kind(10), LabelKind::Terminal);
  // x := x + r at label 5 continues at z := z - 1 (label 7); skip at 6 as well.
  EXPECT_EQ(only_arc(cfg, 5).dst, 7);
  EXPECT_EQ(only_arc(cfg, 6).dst, 7);
  EXPECT_TRUE(only_arc(cfg, 6).update.is_identity());
  // the inner loop exits to y := 4 * y, the outer loop to the terminal label.
  auto outer = cfg.outgoing(1);
  ASSERT_EQ(outer.size(), 2u);
  EXPECT_EQ(cfg.transitions[outer[0]].dst, 2);
  EXPECT_EQ(cfg.transitions[outer[1]].dst, 10);
  auto inner = cfg.outgoing(3);
  EXPECT_EQ(cfg.transitions[inner[1]].dst, 8);
  EXPECT_EQ(only_arc(cfg, 9).dst, 1);
}

TEST(CFG, ProbabilisticAndNondeterministicLabels) {
  auto cfg = build_cfg(parse_program(slurp(data("programs/mini_roulette.pp"))));
  EXPECT_EQ(cfg.kind(4), LabelKind::Nondet);
  EXPECT_EQ(cfg.kind(5), LabelKind::Prob);
  auto arcs = cfg.outgoing(5);
  ASSERT_EQ(arcs.size(), 2u);
  EXPECT_EQ(cfg.transitions[arcs[0]].dst, 6);
  EXPECT_EQ(cfg.transitions[arcs[0]].prob, Rational(6, 13));
  EXPECT_EQ(cfg.transitions[arcs[1]].prob, Rational(7, 13));
}

TEST(CFG, LoopForestNestsInnerLoops) {
  auto prog = parse_program(slurp(data("programs/program2.pp")));
  auto cfg = build_cfg(prog);
  auto forest = loop_forest(cfg, prog);
  ASSERT_EQ(forest.size(), 1u);
  EXPECT_EQ(forest[0].head, 1);
  EXPECT_EQ(forest[0].exit, 12);
  ASSERT_EQ(forest[0].children.size(), 2u);
  EXPECT_EQ(forest[0].children[0].head, 4);
  EXPECT_EQ(forest[0].children[0].exit, 7);
  EXPECT_EQ(forest[0].children[1].head, 7);
  EXPECT_EQ(forest[0].children[1].body, (std::set<Label>{8, 9}));
}

TEST(CFG, LoopSubgraphTreatsTheExitAsTerminal) {
  auto prog = parse_program(slurp(data("programs/program1.pp")));
  auto cfg = build_cfg(prog);
  auto forest = loop_forest(cfg, prog);
  CFG inner = loop_subcfg(cfg, forest[0].children[0]);
  EXPECT_EQ(inner.l_in, 3);
  EXPECT_EQ(inner.l_out, 6);
  EXPECT_EQ(inner.kind(6), LabelKind::Terminal);
  EXPECT_FALSE(inner.contains(1));
  EXPECT_EQ(inner.labels(), (std::vector<Label>{3, 4, 5, 6}));
}

TEST(CFG, SamplePointsTakeTheProductOfMarginals) {
  auto cfg = build_cfg(parse_program("dist r = {1: 1/4, -1: 3/4}; dist s = {0: 1/2, 2: 1/2}; x := r + s"));
  auto pts = sample_points(cfg.transitions.front().update, cfg.rvars, cfg.dists);
  ASSERT_EQ(pts.size(), 4u);
  Rational total = 0;
  for (const auto& p : pts) total += p.prob;
  EXPECT_EQ(total, 1);
  EXPECT_EQ(pts[0].prob * pts[3].prob, Rational(1, 4) * Rational(1, 2) * Rational(3, 4) * Rational(1, 2));
}

TEST(CFG, DotOutputNamesEveryLabel) {
  auto cfg = build_cfg(parse_program(slurp(data("programs/program3.pp"))));
  std::string dot = to_dot(cfg);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  for (Label l : cfg.labels()) EXPECT_NE(dot.find(std::to_string(l)), std::string::npos);
}
