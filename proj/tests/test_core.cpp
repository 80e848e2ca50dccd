#include <random>

#include <gtest/gtest.h>

#include "dsmv/errors.hpp"
#include "dsmv/frontend.hpp"
#include "dsmv/polyhedron.hpp"

using namespace dsmv;

namespace {

Rational q(const char* text) { return parse_rational(text); }

Rational frac(int num, int den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

std::map<std::string, Rational> point(long x, long y) { return {{"x", Rational(x)}, {"y", Rational(y)}}; }

}  // namespace

TEST(Rational, ParsesFractionsAndDecimalsExactly) {
  EXPECT_EQ(q("6/13"), Rational(6, 13));
  EXPECT_EQ(q("-3/6"), Rational(-1, 2));
  EXPECT_EQ(q("0.25"), Rational(1, 4));
  EXPECT_EQ(q("-70.6"), Rational(-353, 5));
  EXPECT_EQ(q("155.6"), Rational(778, 5));
  EXPECT_EQ(q(".5"), Rational(1, 2));
}

TEST(Rational, RejectsMalformedText) {
  EXPECT_THROW(q("1/0"), std::invalid_argument);
  EXPECT_THROW(q("abc"), std::invalid_argument);
  EXPECT_THROW(q("1.2.3"), std::invalid_argument);
  EXPECT_THROW(q(""), std::invalid_argument);
}

TEST(Rational, FloorCeilAndDecimal) {
  EXPECT_EQ(floor(Rational(-7, 2)), -4);
  EXPECT_EQ(ceil(Rational(-7, 2)), -3);
  EXPECT_EQ(floor(Rational(7, 2)), 3);
  EXPECT_EQ(to_decimal(Rational(-341, 5), 3), "-68.2");
  EXPECT_EQ(to_decimal(Rational(1, 3), 4), "0.3333");
  EXPECT_EQ(to_string(Rational(4, 299)), "4/299");
  EXPECT_EQ(to_int64(Rational(-12)), -12);
  EXPECT_THROW(to_int64(Rational(1, 2)), std::overflow_error);
}

TEST(LinearExpr, ParsesAndCanonicalizes) {
  LinearExpr e = parse_linear_expr("6*x - 3/299*y + 5 - 6*x + 2*z");
  EXPECT_EQ(e.coefficient("x"), 0);
  EXPECT_EQ(e.coefficient("y"), Rational(-3, 299));
  EXPECT_EQ(e.coefficient("z"), 2);
  EXPECT_EQ(e.constant(), 5);
  EXPECT_EQ(e.variables(), (std::set<std::string>{"y", "z"}));
  EXPECT_EQ(parse_linear_expr("0.25 * y"), LinearExpr::variable("y", Rational(1, 4)));
  EXPECT_EQ(parse_linear_expr("2*(x + 1) - (x - 3)"), parse_linear_expr("x + 5"));
}

TEST(LinearExpr, RejectsProducts) {
  EXPECT_THROW(parse_linear_expr("x * y"), NonlinearError);
  EXPECT_THROW(parse_linear_expr("(x + 1) * (y - 1)"), NonlinearError);
}

TEST(LinearExpr, SubstituteMatchesPointwiseEvaluation) {
  LinearExpr f = parse_linear_expr("3*x - 2*y + 7");
  LinearExpr g = parse_linear_expr("x + 4*y - 1");
  LinearExpr h = f.substitute("x", g);
  for (long x = -3; x <= 3; ++x) {
    for (long y = -3; y <= 3; ++y) {
      auto p = point(x, y);
      Rational gx = g.evaluate([&](const std::string& v) { return p.at(v); });
      Rational expected = 3 * gx - 2 * Rational(y) + 7;
      EXPECT_EQ(h.evaluate([&](const std::string& v) { return p.at(v); }), expected);
    }
  }
}

TEST(LinearExpr, RendersInRequestedOrder) {
  LinearExpr e = parse_linear_expr("-3/5*y + 364/5*x - 13/5");
  EXPECT_EQ(e.to_string({"x", "y"}), "364/5*x - 3/5*y - 13/5");
  EXPECT_EQ(LinearExpr().to_string(), "0");
}

// not(a.x <= b) over the integers must contain exactly the integer points outside.
TEST(Polyhedron, IntegerNegationMatchesEnumeration) {
  std::mt19937 gen(7);
  std::uniform_int_distribution<int> coeff(-3, 3), rhs(-5, 5), den(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    LinearExpr lhs = LinearExpr::variable("x", frac(coeff(gen), den(gen))) +
                     LinearExpr::variable("y", frac(coeff(gen), den(gen)));
    if (lhs.is_constant()) continue;
    Constraint row{lhs, frac(rhs(gen), den(gen))};
    Constraint neg = negate_integer(row);
    for (long x = -6; x <= 6; ++x) {
      for (long y = -6; y <= 6; ++y) {
        EXPECT_NE(row.holds(point(x, y)), neg.holds(point(x, y))) << "at (" << x << ", " << y << ")";
      }
    }
  }
}

TEST(Polyhedron, ComplementOfUnionMatchesEnumeration) {
  PolyUnion g = parse_linear_predicate("(x >= 1 and y <= 2) or x + y == 0 or 2*x - 3*y > 4");
  PolyUnion c = g.complement_integer();
  for (long x = -8; x <= 8; ++x) {
    for (long y = -8; y <= 8; ++y) EXPECT_NE(g.contains(point(x, y)), c.contains(point(x, y)));
  }
}

TEST(Polyhedron, StrictAtomsAreTightenedOverIntegers) {
  PolyUnion p = parse_linear_predicate("x < 2");
  ASSERT_EQ(p.disjuncts().size(), 1u);
  EXPECT_TRUE(p.contains(point(1, 0)));
  EXPECT_FALSE(p.contains(point(2, 0)));
  EXPECT_TRUE(parse_linear_predicate("true").is_universe());
  EXPECT_TRUE(parse_linear_predicate("false").is_syntactically_empty());
}

TEST(Polyhedron, ChainedComparisons) {
  PolyUnion p = parse_linear_predicate("1 <= y <= 9");
  EXPECT_TRUE(p.contains(point(0, 1)));
  EXPECT_TRUE(p.contains(point(0, 9)));
  EXPECT_FALSE(p.contains(point(0, 10)));
  EXPECT_FALSE(p.contains(point(0, 0)));
}

TEST(Polyhedron, IntersectAndUnite) {
  PolyUnion a = parse_linear_predicate("x >= 0");
  PolyUnion b = parse_linear_predicate("x <= 3 or y >= 5");
  PolyUnion both = a.intersect(b);
  PolyUnion either = a.unite(b);
  for (long x = -4; x <= 6; ++x) {
    for (long y = 0; y <= 7; ++y) {
      auto p = point(x, y);
      EXPECT_EQ(both.contains(p), a.contains(p) && b.contains(p));
      EXPECT_EQ(either.contains(p), a.contains(p) || b.contains(p));
    }
  }
}
