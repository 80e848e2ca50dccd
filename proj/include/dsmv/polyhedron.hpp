#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dsmv/linear_expr.hpp"

namespace dsmv {

/// lhs <= rhs with lhs homogeneous (no constant term).
struct Constraint {
  LinearExpr lhs;
  Rational rhs;

  /// Builds `form <= 0`, moving the constant of `form` to the right-hand side.
  static Constraint le_zero(const LinearExpr& form);

  bool holds(const std::map<std::string, Rational>& point) const;
  bool is_trivial() const { return lhs.is_constant(); }
  friend bool operator==(const Constraint&, const Constraint&) = default;
};

/// Dense view {x | A x <= b} over an explicit variable order.
struct DenseSystem {
  std::vector<std::string> vars;
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
};

/// Conjunction of linear constraints. Zero rows denote the whole space.
class Polyhedron {
 public:
  Polyhedron() = default;
  explicit Polyhedron(std::vector<Constraint> rows);

  const std::vector<Constraint>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool is_universe() const { return rows_.empty(); }
  /// True if some row is a constant contradiction such as 0 <= -1.
  bool trivially_empty() const { return trivially_empty_; }

  void add(const Constraint& row);
  Polyhedron intersect(const Polyhedron& other) const;
  bool contains(const std::map<std::string, Rational>& point) const;
  std::set<std::string> variables() const;
  DenseSystem dense(const std::vector<std::string>& vars) const;

  std::string to_string(const std::vector<std::string>& order = {}) const;
  friend bool operator==(const Polyhedron&, const Polyhedron&) = default;

 private:
  std::vector<Constraint> rows_;
  bool trivially_empty_ = false;
};

/// Finite union of polyhedra. No disjuncts denotes the empty set.
class PolyUnion {
 public:
  PolyUnion() = default;
  explicit PolyUnion(std::vector<Polyhedron> disjuncts);

  static PolyUnion universe() { return PolyUnion({Polyhedron{}}); }
  static PolyUnion empty() { return PolyUnion(); }

  const std::vector<Polyhedron>& disjuncts() const { return disjuncts_; }
  bool is_universe() const;
  bool is_syntactically_empty() const { return disjuncts_.empty(); }

  PolyUnion intersect(const PolyUnion& other) const;
  PolyUnion unite(const PolyUnion& other) const;
  /// Complement over integer points: strict bounds are tightened by one unit.
  PolyUnion complement_integer() const;
  bool contains(const std::map<std::string, Rational>& point) const;

  std::string to_string(const std::vector<std::string>& order = {}) const;
  friend bool operator==(const PolyUnion&, const PolyUnion&) = default;

 private:
  std::vector<Polyhedron> disjuncts_;
};

enum class CmpOp { Le, Lt, Ge, Gt, Eq };

/// Propositional arithmetic predicate, kept as written for printing.
struct BoolExpr {
  enum class Kind { Atom, Not, And, Or, True, False };
  Kind kind = Kind::True;
  LinearExpr lhs;
  LinearExpr rhs;
  CmpOp op = CmpOp::Le;
  std::vector<std::shared_ptr<const BoolExpr>> args;

  std::string to_string(const std::vector<std::string>& order = {}) const;
};
using BoolExprPtr = std::shared_ptr<const BoolExpr>;

BoolExprPtr make_atom(LinearExpr lhs, CmpOp op, LinearExpr rhs);
BoolExprPtr make_not(BoolExprPtr arg);
BoolExprPtr make_and(std::vector<BoolExprPtr> args);
BoolExprPtr make_or(std::vector<BoolExprPtr> args);
BoolExprPtr make_bool(bool value);

/// Disjunctive normal form over integer-valued variables. Strict atoms and negated
/// atoms are normalized to non-strict ones (x < k becomes x <= k - 1 when the
/// coefficients are integral after scaling).
PolyUnion to_dnf(const BoolExpr& expr);

/// `lhs op rhs` as a union of polyhedra (one disjunct, or one per side for `!=`).
Polyhedron atom_to_polyhedron(const LinearExpr& lhs, CmpOp op, const LinearExpr& rhs);

/// Integer complement of a single constraint: not(a.x <= b) is a.x >= floor(b') + 1
/// after scaling a to primitive integers.
Constraint negate_integer(const Constraint& row);

}  // namespace dsmv
