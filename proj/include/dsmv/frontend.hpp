#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dsmv/linear_expr.hpp"
#include "dsmv/polyhedron.hpp"

namespace dsmv {

using Label = int;

/// Finite-support distribution over integers with exact probabilities summing to one.
class DiscreteDist {
 public:
  using Entry = std::pair<std::int64_t, Rational>;

  DiscreteDist() = default;
  /// Throws SemanticError on duplicate values, non-positive probabilities, or a total != 1.
  explicit DiscreteDist(std::vector<Entry> support);

  const std::vector<Entry>& support() const { return support_; }
  Rational expectation() const;
  std::int64_t min_value() const;
  std::int64_t max_value() const;
  std::string to_string() const;

 private:
  std::vector<Entry> support_;
};

using DistMap = std::map<std::string, DiscreteDist>;

/// A loop or branch condition: the predicate as written plus its DNF.
struct Guard {
  BoolExprPtr expr;
  PolyUnion dnf;
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct SkipStmt {};

struct AssignStmt {
  std::string var;
  LinearExpr rhs;
};

/// Flattened sequential composition; never nested directly inside another SeqStmt.
struct SeqStmt {
  std::vector<StmtPtr> items;
};

enum class BranchKind { Guard, Star, Prob };

struct IfStmt {
  BranchKind kind = BranchKind::Guard;
  Guard guard;         // BranchKind::Guard only
  Rational prob;       // BranchKind::Prob only
  StmtPtr then_branch;
  StmtPtr else_branch;
};

struct WhileStmt {
  Guard guard;
  StmtPtr body;
};

struct Stmt {
  Label label = 0;  // 0 for SeqStmt, which carries no program counter
  std::variant<SkipStmt, AssignStmt, SeqStmt, IfStmt, WhileStmt> node;

  template <typename T>
  const T* as() const { return std::get_if<T>(&node); }
};

struct ProgramAST {
  StmtPtr root;
  std::vector<std::string> pvars;  // order of first occurrence
  std::vector<std::string> rvars;  // order of declaration
  DistMap dists;
  std::map<Label, const Stmt*> labels;
  Label terminal = 0;
};

/// Parses `dist` declarations followed by one program. Labels are assigned in source order
/// starting at 1; the terminal label is one past the last statement label.
ProgramAST parse_program(std::string_view text);

/// Parses a statement fragment against known sampling-variable declarations.
/// Used for program fragments quoted inside proof derivations.
ProgramAST parse_fragment(std::string_view text, const DistMap& dists);

/// Parses a predicate into DNF over integer-valued variables.
PolyUnion parse_linear_predicate(std::string_view text);

/// Parses an affine expression such as "6*x - 3/299*y + 5".
LinearExpr parse_linear_expr(std::string_view text);

/// Program text in the accepted concrete syntax (without dist declarations unless `dists` is given).
std::string to_source(const Stmt& stmt, const std::vector<std::string>& order = {});
std::string to_source(const ProgramAST& prog);

/// Label-insensitive structural equality.
bool same_structure(const Stmt& lhs, const Stmt& rhs);

/// Top-level statements of a sequence (a single statement yields itself).
std::vector<StmtPtr> flatten(const StmtPtr& stmt);

}  // namespace dsmv
