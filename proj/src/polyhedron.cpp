#include "dsmv/polyhedron.hpp"

#include <algorithm>
#include <numeric>

#include "dsmv/errors.hpp"

namespace dsmv {

namespace {

// Scales a constraint so that its coefficients are coprime integers.
Constraint primitive(const Constraint& row) {
  if (row.lhs.is_constant()) return row;
  Integer lcm_den = 1;
  for (const auto& [name, coeff] : row.lhs.terms()) {
    mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), coeff.get_den_mpz_t());
  }
  Integer gcd_num = 0;
  for (const auto& [name, coeff] : row.lhs.terms()) {
    Integer scaled = Rational(coeff * lcm_den).get_num();
    mpz_gcd(gcd_num.get_mpz_t(), gcd_num.get_mpz_t(), scaled.get_mpz_t());
  }
  Rational factor(lcm_den, gcd_num);
  factor.canonicalize();
  return Constraint{row.lhs * factor, row.rhs * factor};
}

// lhs < rhs over integers with integral coefficients: lhs <= ceil(rhs) - 1.
Constraint strict_to_nonstrict(const Constraint& row) {
  Constraint p = primitive(row);
  return Constraint{p.lhs, ceil(p.rhs) - 1};
}

}  // namespace

Constraint Constraint::le_zero(const LinearExpr& form) {
  return Constraint{form.homogeneous(), -form.constant()};
}

bool Constraint::holds(const std::map<std::string, Rational>& point) const {
  Rational value = lhs.evaluate([&point](const std::string& name) {
    auto it = point.find(name);
    return it == point.end() ? Rational(0) : it->second;
  });
  return value <= rhs;
}

Constraint negate_integer(const Constraint& row) {
  // not(lhs <= rhs)  <=>  -lhs < -rhs
  return strict_to_nonstrict(Constraint{-row.lhs, -row.rhs});
}

Polyhedron::Polyhedron(std::vector<Constraint> rows) {
  for (auto& row : rows) add(row);
}

void Polyhedron::add(const Constraint& row) {
  if (row.lhs.is_constant()) {
    if (row.rhs < 0) trivially_empty_ = true;
    else return;  // 0 <= nonnegative constant
  }
  if (std::find(rows_.begin(), rows_.end(), row) == rows_.end()) rows_.push_back(row);
}

Polyhedron Polyhedron::intersect(const Polyhedron& other) const {
  Polyhedron out = *this;
  for (const auto& row : other.rows_) out.add(row);
  out.trivially_empty_ = out.trivially_empty_ || other.trivially_empty_;
  return out;
}

bool Polyhedron::contains(const std::map<std::string, Rational>& point) const {
  if (trivially_empty_) return false;
  return std::all_of(rows_.begin(), rows_.end(), [&point](const Constraint& r) { return r.holds(point); });
}

std::set<std::string> Polyhedron::variables() const {
  std::set<std::string> out;
  for (const auto& row : rows_) {
    for (const auto& [name, coeff] : row.lhs.terms()) out.insert(name);
  }
  return out;
}

DenseSystem Polyhedron::dense(const std::vector<std::string>& vars) const {
  DenseSystem sys;
  sys.vars = vars;
  for (const auto& row : rows_) {
    std::vector<Rational> a(vars.size());
    for (const auto& [name, coeff] : row.lhs.terms()) {
      auto it = std::find(vars.begin(), vars.end(), name);
      if (it == vars.end()) throw DimensionError("variable " + name + " not in polyhedron column order");
      a[static_cast<std::size_t>(it - vars.begin())] = coeff;
    }
    sys.A.push_back(std::move(a));
    sys.b.push_back(row.rhs);
  }
  if (trivially_empty_) {
    sys.A.emplace_back(vars.size());
    sys.b.emplace_back(-1);
  }
  return sys;
}

std::string Polyhedron::to_string(const std::vector<std::string>& order) const {
  if (trivially_empty_) return "false";
  if (rows_.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (i) out += " and ";
    out += rows_[i].lhs.to_string(order) + " <= " + dsmv::to_string(rows_[i].rhs);
  }
  return out;
}

PolyUnion::PolyUnion(std::vector<Polyhedron> disjuncts) {
  for (auto& d : disjuncts) {
    if (!d.trivially_empty()) disjuncts_.push_back(std::move(d));
  }
}

bool PolyUnion::is_universe() const {
  return std::any_of(disjuncts_.begin(), disjuncts_.end(), [](const Polyhedron& p) { return p.is_universe(); });
}

PolyUnion PolyUnion::intersect(const PolyUnion& other) const {
  std::vector<Polyhedron> out;
  for (const auto& lhs : disjuncts_) {
    for (const auto& rhs : other.disjuncts_) out.push_back(lhs.intersect(rhs));
  }
  return PolyUnion(std::move(out));
}

PolyUnion PolyUnion::unite(const PolyUnion& other) const {
  std::vector<Polyhedron> out = disjuncts_;
  out.insert(out.end(), other.disjuncts_.begin(), other.disjuncts_.end());
  return PolyUnion(std::move(out));
}

PolyUnion PolyUnion::complement_integer() const {
  // not(OR_i AND_j r_ij) = AND_i OR_j not(r_ij)
  PolyUnion result = universe();
  for (const auto& disjunct : disjuncts_) {
    std::vector<Polyhedron> options;
    for (const auto& row : disjunct.rows()) options.push_back(Polyhedron({negate_integer(row)}));
    result = result.intersect(PolyUnion(std::move(options)));
  }
  return result;
}

bool PolyUnion::contains(const std::map<std::string, Rational>& point) const {
  return std::any_of(disjuncts_.begin(), disjuncts_.end(),
                     [&point](const Polyhedron& p) { return p.contains(point); });
}

std::string PolyUnion::to_string(const std::vector<std::string>& order) const {
  if (disjuncts_.empty()) return "false";
  std::string out;
  for (std::size_t i = 0; i < disjuncts_.size(); ++i) {
    if (i) out += " | ";
    out += disjuncts_[i].to_string(order);
  }
  return out;
}

BoolExprPtr make_atom(LinearExpr lhs, CmpOp op, LinearExpr rhs) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = BoolExpr::Kind::Atom;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  e->op = op;
  return e;
}

BoolExprPtr make_not(BoolExprPtr arg) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = BoolExpr::Kind::Not;
  e->args.push_back(std::move(arg));
  return e;
}

BoolExprPtr make_and(std::vector<BoolExprPtr> args) {
  if (args.size() == 1) return args.front();
  auto e = std::make_shared<BoolExpr>();
  e->kind = BoolExpr::Kind::And;
  e->args = std::move(args);
  return e;
}

BoolExprPtr make_or(std::vector<BoolExprPtr> args) {
  if (args.size() == 1) return args.front();
  auto e = std::make_shared<BoolExpr>();
  e->kind = BoolExpr::Kind::Or;
  e->args = std::move(args);
  return e;
}

BoolExprPtr make_bool(bool value) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = value ? BoolExpr::Kind::True : BoolExpr::Kind::False;
  return e;
}

namespace {

const char* op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
    case CmpOp::Eq: return "==";
  }
  return "?";
}

PolyUnion dnf(const BoolExpr& e, bool negated) {
  using Kind = BoolExpr::Kind;
  switch (e.kind) {
    case Kind::True: return negated ? PolyUnion::empty() : PolyUnion::universe();
    case Kind::False: return negated ? PolyUnion::universe() : PolyUnion::empty();
    case Kind::Not: return dnf(*e.args.front(), !negated);
    case Kind::Atom: {
      PolyUnion atom({atom_to_polyhedron(e.lhs, e.op, e.rhs)});
      return negated ? atom.complement_integer() : atom;
    }
    case Kind::And:
    case Kind::Or: {
      bool conjunctive = (e.kind == Kind::And) != negated;
      PolyUnion acc = conjunctive ? PolyUnion::universe() : PolyUnion::empty();
      for (const auto& arg : e.args) {
        PolyUnion part = dnf(*arg, negated);
        acc = conjunctive ? acc.intersect(part) : acc.unite(part);
      }
      return acc;
    }
  }
  return PolyUnion::empty();
}

}  // namespace

Polyhedron atom_to_polyhedron(const LinearExpr& lhs, CmpOp op, const LinearExpr& rhs) {
  LinearExpr diff = lhs - rhs;  // diff op 0
  switch (op) {
    case CmpOp::Le: return Polyhedron({Constraint::le_zero(diff)});
    case CmpOp::Ge: return Polyhedron({Constraint::le_zero(-diff)});
    case CmpOp::Lt: return Polyhedron({strict_to_nonstrict(Constraint::le_zero(diff))});
    case CmpOp::Gt: return Polyhedron({strict_to_nonstrict(Constraint::le_zero(-diff))});
    case CmpOp::Eq: return Polyhedron({Constraint::le_zero(diff), Constraint::le_zero(-diff)});
  }
  return Polyhedron{};
}

PolyUnion to_dnf(const BoolExpr& expr) { return dnf(expr, false); }

std::string BoolExpr::to_string(const std::vector<std::string>& order) const {
  switch (kind) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Atom: return lhs.to_string(order) + " " + op_text(op) + " " + rhs.to_string(order);
    case Kind::Not: return "not (" + args.front()->to_string(order) + ")";
    case Kind::And:
    case Kind::Or: {
      std::string out;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += kind == Kind::And ? " and " : " or ";
        bool wrap = args[i]->kind == Kind::And || args[i]->kind == Kind::Or;
        out += wrap ? "(" + args[i]->to_string(order) + ")" : args[i]->to_string(order);
      }
      return out;
    }
  }
  return "";
}

}  // namespace dsmv
