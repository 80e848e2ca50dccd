#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsmv/linear_expr.hpp"

namespace dsmv {

enum class Relation { Le, Eq };

/// form (relation) rhs, where `form` carries no constant term of interest
/// (a constant is moved to the right-hand side on insertion).
struct LPConstraint {
  LinearExpr form;
  Relation rel = Relation::Le;
  Rational rhs;
  std::string tag;  // provenance for dumps and reports
};

enum class Sense { Minimize, Maximize };

class LPProblem {
 public:
  /// Declares a variable; undeclared variables appearing in constraints are free.
  /// Declaring twice keeps the first declaration's position but updates the sign.
  void add_variable(const std::string& name, bool nonnegative = false);
  void add_constraint(const LinearExpr& form, Relation rel, const Rational& rhs, std::string tag = {});
  void set_objective(Sense sense, LinearExpr objective);

  const std::vector<std::string>& variables() const { return order_; }
  bool is_nonnegative(const std::string& name) const;
  const std::vector<LPConstraint>& constraints() const { return constraints_; }
  const std::optional<std::pair<Sense, LinearExpr>>& objective() const { return objective_; }

  /// Plain-text rendering, one item per line with exact fractions. Byte-deterministic.
  std::string to_text() const;

 private:
  void touch(const std::string& name);

  std::vector<std::string> order_;
  std::map<std::string, bool> nonneg_;
  std::vector<LPConstraint> constraints_;
  std::optional<std::pair<Sense, LinearExpr>> objective_;
};

struct LPResult {
  enum class Status { Feasible, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  std::map<std::string, Rational> values;  // every declared variable when Feasible
  std::optional<Rational> optimum;         // when an objective is set and Feasible

  bool feasible() const { return status == Status::Feasible; }
  Rational value(const std::string& name) const;
};

std::string to_string(LPResult::Status status);

/// Two-phase primal simplex in exact rational arithmetic. Dantzig pricing, falling back to
/// Bland's rule on runs of degenerate pivots so that the method cannot cycle.
LPResult lp_solve(const LPProblem& problem);

/// True iff `point` satisfies every constraint exactly.
bool satisfies(const LPProblem& problem, const std::map<std::string, Rational>& point);

}  // namespace dsmv
