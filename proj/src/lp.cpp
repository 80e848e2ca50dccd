#include "dsmv/lp.hpp"

#include <algorithm>
#include <sstream>

#include "dsmv/errors.hpp"

namespace dsmv {

void LPProblem::touch(const std::string& name) {
  if (nonneg_.emplace(name, false).second) order_.push_back(name);
}

void LPProblem::add_variable(const std::string& name, bool nonnegative) {
  touch(name);
  nonneg_[name] = nonnegative;
}

void LPProblem::add_constraint(const LinearExpr& form, Relation rel, const Rational& rhs, std::string tag) {
  for (const auto& [name, coeff] : form.terms()) touch(name);
  constraints_.push_back({form.homogeneous(), rel, rhs - form.constant(), std::move(tag)});
}

void LPProblem::set_objective(Sense sense, LinearExpr objective) {
  for (const auto& [name, coeff] : objective.terms()) touch(name);
  objective_ = std::make_pair(sense, std::move(objective));
}

bool LPProblem::is_nonnegative(const std::string& name) const {
  auto it = nonneg_.find(name);
  return it != nonneg_.end() && it->second;
}

std::string LPProblem::to_text() const {
  std::ostringstream out;
  for (const auto& name : order_) out << "var " << name << (is_nonnegative(name) ? " >= 0" : " free") << "\n";
  if (objective_) {
    out << (objective_->first == Sense::Minimize ? "minimize " : "maximize ")
        << objective_->second.to_string(order_) << "\n";
  }
  for (const auto& c : constraints_) {
    if (!c.tag.empty()) out << "[" << c.tag << "] ";
    out << c.form.to_string(order_) << (c.rel == Relation::Le ? " <= " : " = ") << to_string(c.rhs) << "\n";
  }
  return out.str();
}

Rational LPResult::value(const std::string& name) const {
  auto it = values.find(name);
  return it == values.end() ? Rational(0) : it->second;
}

std::string to_string(LPResult::Status status) {
  switch (status) {
    case LPResult::Status::Feasible: return "feasible";
    case LPResult::Status::Infeasible: return "infeasible";
    case LPResult::Status::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

// Dense simplex tableau for: minimize c.y subject to T y = rhs, y >= 0.
// The objective row stores reduced costs and, in its last entry, minus the objective value.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows, std::vector<Rational>(cols + 1)), obj_(cols + 1), basis_(rows), allowed_(cols, true), n_(cols) {}

  Rational& at(std::size_t r, std::size_t c) { return rows_[r][c]; }
  Rational& rhs(std::size_t r) { return rows_[r][n_]; }
  std::vector<Rational>& obj() { return obj_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::vector<bool>& allowed() { return allowed_; }
  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return n_; }

  void erase_row(std::size_t r) {
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

  void pivot(std::size_t r, std::size_t e) {
    auto& prow = rows_[r];
    if (prow[e] != 1) {
      Rational inv = 1 / prow[e];
      for (auto& v : prow) {
        if (sgn(v) != 0) v *= inv;
      }
    }
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j <= n_; ++j) {
      if (sgn(prow[j]) != 0) nz.push_back(j);
    }
    mpq_class tmp;
    auto eliminate = [&](std::vector<Rational>& row) {
      if (sgn(row[e]) == 0) return;
      Rational f = row[e];
      for (std::size_t j : nz) {
        mpq_mul(tmp.get_mpq_t(), f.get_mpq_t(), prow[j].get_mpq_t());
        mpq_sub(row[j].get_mpq_t(), row[j].get_mpq_t(), tmp.get_mpq_t());
      }
    };
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i != r) eliminate(rows_[i]);
    }
    eliminate(obj_);
    basis_[r] = e;
  }

  /// Runs primal simplex iterations. Pricing picks the most negative reduced cost; after a
  /// run of degenerate pivots it switches to Bland's rule (smallest index) until the
  /// objective moves again, which rules out cycling. Returns false if unbounded.
  bool optimize() {
    constexpr int kDegenerateLimit = 100;
    int degenerate_run = 0;
    while (true) {
      bool bland = degenerate_run >= kDegenerateLimit;
      std::size_t enter = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (!allowed_[j] || sgn(obj_[j]) >= 0) continue;
        if (enter == n_ || (!bland && obj_[j] < obj_[enter])) enter = j;
        if (bland) break;
      }
      if (enter == n_) return true;
      std::size_t leave = rows_.size();
      Rational best;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (sgn(rows_[i][enter]) <= 0) continue;
        Rational ratio = rows_[i][n_] / rows_[i][enter];
        if (leave == rows_.size() || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == rows_.size()) return false;
      degenerate_run = sgn(best) == 0 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
  }

 private:
  std::vector<std::vector<Rational>> rows_;
  std::vector<Rational> obj_;
  std::vector<std::size_t> basis_;
  std::vector<bool> allowed_;
  std::size_t n_;

};

}  // namespace

LPResult lp_solve(const LPProblem& problem) {
  const auto& vars = problem.variables();
  const auto& cons = problem.constraints();

  // Column layout: one column per nonnegative variable, two (positive and negative part)
  // per free variable, then one slack per inequality, then one artificial per row needing it.
  std::map<std::string, std::pair<std::size_t, std::size_t>> cols;  // second == npos if none
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t ncols = 0;
  for (const auto& v : vars) {
    if (problem.is_nonnegative(v)) cols[v] = {ncols++, kNone};
    else {
      cols[v] = {ncols, ncols + 1};
      ncols += 2;
    }
  }
  std::vector<std::size_t> slack(cons.size(), kNone);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    if (cons[i].rel == Relation::Le) slack[i] = ncols++;
  }
  std::vector<bool> needs_artificial(cons.size());
  std::size_t first_artificial = ncols;
  std::vector<std::size_t> artificial(cons.size(), kNone);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    needs_artificial[i] = cons[i].rel == Relation::Eq || sgn(cons[i].rhs) < 0;
    if (needs_artificial[i]) artificial[i] = ncols++;
  }

  Tableau t(cons.size(), ncols);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    bool flip = sgn(cons[i].rhs) < 0;
    for (const auto& [name, coeff] : cons[i].form.terms()) {
      auto [pos, neg] = cols.at(name);
      t.at(i, pos) += flip ? Rational(-coeff) : coeff;
      if (neg != kNone) t.at(i, neg) -= flip ? Rational(-coeff) : coeff;
    }
    if (slack[i] != kNone) t.at(i, slack[i]) = flip ? -1 : 1;
    t.rhs(i) = flip ? Rational(-cons[i].rhs) : cons[i].rhs;
    if (artificial[i] != kNone) {
      t.at(i, artificial[i]) = 1;
      t.basis()[i] = artificial[i];
    } else {
      t.basis()[i] = slack[i];
    }
  }

  // Phase 1: minimize the sum of artificials.
  if (first_artificial < ncols) {
    auto& obj = t.obj();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      if (artificial[i] == kNone) continue;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (sgn(t.at(i, j)) != 0) obj[j] -= t.at(i, j);
      }
      obj[ncols] -= t.rhs(i);
    }
    t.optimize();
    if (sgn(t.obj()[ncols]) != 0) return LPResult{LPResult::Status::Infeasible, {}, std::nullopt};
    // Drive zero-level artificials out of the basis; drop redundant rows.
    for (std::size_t i = t.rows(); i-- > 0;) {
      if (t.basis()[i] < first_artificial) continue;
      std::size_t enter = kNone;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (sgn(t.at(i, j)) != 0) {
          enter = j;
          break;
        }
      }
      if (enter == kNone) t.erase_row(i);
      else t.pivot(i, enter);
    }
    for (std::size_t j = first_artificial; j < ncols; ++j) t.allowed()[j] = false;
  }

  LPResult result;
  result.status = LPResult::Status::Feasible;
  if (const auto& objective = problem.objective()) {
    std::vector<Rational> cost(ncols);
    Rational sign = objective->first == Sense::Minimize ? 1 : -1;
    for (const auto& [name, coeff] : objective->second.terms()) {
      auto [pos, neg] = cols.at(name);
      cost[pos] += sign * coeff;
      if (neg != kNone) cost[neg] -= sign * coeff;
    }
    auto& obj = t.obj();
    for (std::size_t j = 0; j <= ncols; ++j) obj[j] = j < ncols ? cost[j] : Rational(0);
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const Rational& cb = cost[t.basis()[i]];
      if (sgn(cb) == 0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) {
        if (sgn(t.at(i, j)) != 0) obj[j] -= cb * t.at(i, j);
      }
    }
    if (!t.optimize()) return LPResult{LPResult::Status::Unbounded, {}, std::nullopt};
    Rational value = -t.obj()[ncols];
    result.optimum = objective->first == Sense::Minimize ? value : Rational(-value);
    result.optimum->canonicalize();
  }

  std::vector<Rational> y(ncols);
  for (std::size_t i = 0; i < t.rows(); ++i) y[t.basis()[i]] = t.rhs(i);
  for (const auto& v : vars) {
    auto [pos, neg] = cols.at(v);
    Rational value = y[pos];
    if (neg != kNone) value -= y[neg];
    result.values[v] = value;
  }
  return result;
}

bool satisfies(const LPProblem& problem, const std::map<std::string, Rational>& point) {
  auto lookup = [&point](const std::string& name) {
    auto it = point.find(name);
    return it == point.end() ? Rational(0) : it->second;
  };
  for (const auto& name : problem.variables()) {
    if (problem.is_nonnegative(name) && lookup(name) < 0) return false;
  }
  for (const auto& c : problem.constraints()) {
    Rational lhs = c.form.evaluate(lookup);
    if (c.rel == Relation::Le ? lhs > c.rhs : lhs != c.rhs) return false;
  }
  return true;
}

}  // namespace dsmv
