#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "dsmv/errors.hpp"
#include "dsmv/farkas.hpp"
#include "dsmv/frontend.hpp"

using namespace dsmv;

namespace {

Polyhedron poly(const char* text) {
  PolyUnion u = parse_linear_predicate(text);
  EXPECT_EQ(u.disjuncts().size(), 1u);
  return u.disjuncts().front();
}

LinearExpr expr(const char* text) { return parse_linear_expr(text); }

Rational half(int n) {
  Rational q(n, 2);
  q.canonicalize();
  return q;
}

// Every vertex of a 2-D polyhedron whose rows have coefficients in {-1, 0, 1} and integer
// right-hand sides lies on the half-integer grid, so scanning that grid inside the
// bounding box finds the exact maximum of any linear form.
std::optional<Rational> grid_max(const Polyhedron& H, const LinearExpr& form, int box) {
  std::optional<Rational> best;
  for (int i = -2 * box; i <= 2 * box; ++i) {
    for (int j = -2 * box; j <= 2 * box; ++j) {
      std::map<std::string, Rational> p{{"x", half(i)}, {"y", half(j)}};
      if (!H.contains(p)) continue;
      Rational v = form.evaluate([&](const std::string& n) { return p.at(n); });
      if (!best || v > *best) best = v;
    }
  }
  return best;
}

}  // namespace

TEST(Inclusion, IntervalExamples) {
  Polyhedron H = poly("0 <= x and x <= 2");
  EXPECT_TRUE(polyhedron_includes(H, expr("x - 2")).holds);
  InclusionResult r = polyhedron_includes(H, expr("x - 1"));
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.max_value);
  EXPECT_EQ(*r.max_value, 1);
  EXPECT_EQ(r.witness.at("x"), 2);
  EXPECT_TRUE(polyhedron_includes(H, expr("x"), Rational(2)));
  EXPECT_FALSE(polyhedron_includes(H, expr("x"), Rational(3, 2)));
}

TEST(Inclusion, UnboundedDirectionYieldsAViolatingWitness) {
  Polyhedron H = poly("x >= 0 and y <= 3");
  InclusionResult r = polyhedron_includes(H, expr("x - y - 5"));
  EXPECT_FALSE(r.holds);
  EXPECT_FALSE(r.max_value.has_value());
  EXPECT_TRUE(H.contains(r.witness));
  Rational at = expr("x - y - 5").evaluate([&](const std::string& v) { return r.witness.at(v); });
  EXPECT_GE(at, 1);
}

TEST(Inclusion, EmptyPolyhedronIsReported) {
  Polyhedron H = poly("x >= 2 and x <= 1");
  EXPECT_TRUE(is_empty(H));
  EXPECT_THROW(polyhedron_includes(H, expr("x")), EmptyPolyhedronError);
}

TEST(Inclusion, UniverseOnlyContainsConstantHalfspaces) {
  Polyhedron all;
  EXPECT_TRUE(polyhedron_includes(all, expr("-1")).holds);
  EXPECT_FALSE(polyhedron_includes(all, expr("1")).holds);
  EXPECT_FALSE(polyhedron_includes(all, expr("x - 1000")).holds);
}

// Unknown coefficients: t * x <= 0 on [0, 1] holds exactly when t <= 0.
TEST(FarkasEncode, TemplateCoefficientIsBoundedByTheLemma) {
  Polyhedron H = poly("0 <= x and x <= 1");
  auto fa = farkas_encode(H, {"x"}, {{"x", LinearExpr::variable("t")}}, LinearExpr(), "xi");
  LPProblem lp;
  add_to(lp, fa, "t*x <= 0");
  lp.set_objective(Sense::Maximize, LinearExpr::variable("t"));
  LPResult r = lp_solve(lp);
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(*r.optimum, 0);
}

TEST(FarkasEncode, RejectsForeignVariables) {
  Polyhedron H = poly("0 <= x");
  EXPECT_THROW(farkas_encode(H, {"x"}, {{"y", LinearExpr(Rational(1))}}, LinearExpr(), "xi"), DimensionError);
}

// Property: on 500 random bounded polyhedra, the LP-based inclusion test, the Farkas
// certificate and the dual optimum all agree with grid brute force.
TEST(FarkasProperty, AgreesWithGridBruteForce) {
  std::mt19937 gen(500);
  std::uniform_int_distribution<int> unit(-1, 1), rhs(-3, 3), rows(1, 4), coeff(-3, 3), box(1, 3);
  int empty = 0, holds = 0, fails = 0;
  for (int trial = 0; trial < 500; ++trial) {
    int bx = box(gen);
    std::vector<Constraint> cs;
    for (const char* v : {"x", "y"}) {
      cs.push_back(Constraint::le_zero(LinearExpr::variable(v) - LinearExpr(Rational(bx))));
      cs.push_back(Constraint::le_zero(LinearExpr::variable(v, -1) - LinearExpr(Rational(bx))));
    }
    int k = rows(gen);
    for (int i = 0; i < k; ++i) {
      LinearExpr f = LinearExpr::variable("x", unit(gen)) + LinearExpr::variable("y", unit(gen));
      f.set_constant(rhs(gen));
      cs.push_back(Constraint::le_zero(f));
    }
    Polyhedron H(cs);
    LinearExpr form = LinearExpr::variable("x", coeff(gen)) + LinearExpr::variable("y", coeff(gen));
    form.set_constant(half(rhs(gen) * 2 + unit(gen)));

    auto oracle = grid_max(H, form, bx);
    EXPECT_EQ(is_empty(H), !oracle.has_value());
    if (!oracle) {
      EXPECT_THROW(polyhedron_includes(H, form), EmptyPolyhedronError);
      ++empty;
      continue;
    }
    InclusionResult r = polyhedron_includes(H, form);
    EXPECT_EQ(r.holds, *oracle <= 0);
    ASSERT_TRUE(r.max_value.has_value());
    EXPECT_EQ(*r.max_value, *oracle);
    EXPECT_TRUE(H.contains(r.witness));
    (r.holds ? holds : fails) += 1;

    // Farkas: the multiplier system is feasible exactly when the inclusion holds.
    std::map<std::string, LinearExpr> c{{"x", LinearExpr(form.coefficient("x"))},
                                        {"y", LinearExpr(form.coefficient("y"))}};
    auto fa = farkas_encode(H, {"x", "y"}, c, LinearExpr(-form.constant()), "xi");
    LPProblem lp;
    add_to(lp, fa, "trial");
    EXPECT_EQ(lp_solve(lp).feasible(), r.holds);

    // Strong duality: min b^T xi over A^T xi = c equals max c^T x over H.
    auto dual = farkas_dual(H, form.homogeneous());
    ASSERT_TRUE(dual.has_value());
    EXPECT_EQ(dual->first + form.constant(), *oracle);
  }
  EXPECT_GT(empty, 10);
  EXPECT_GT(holds, 50);
  EXPECT_GT(fails, 50);
}
