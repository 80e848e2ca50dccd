#include "dsmv/farkas.hpp"

#include <algorithm>
#include <set>

#include "dsmv/errors.hpp"

namespace dsmv {

ParamAffine ParamAffine::numeric(const LinearExpr& form) {
  ParamAffine out;
  for (const auto& [name, coeff] : form.terms()) out.coeffs[name] = LinearExpr(coeff);
  out.constant = LinearExpr(form.constant());
  return out;
}

bool ParamAffine::is_numeric() const {
  return constant.is_constant() &&
         std::all_of(coeffs.begin(), coeffs.end(), [](const auto& kv) { return kv.second.is_constant(); });
}

LinearExpr ParamAffine::to_numeric() const {
  if (!is_numeric()) throw DimensionError("parametric form has unresolved unknowns");
  LinearExpr out(constant.constant());
  for (const auto& [name, coeff] : coeffs) out.add_term(name, coeff.constant());
  return out;
}

LinearExpr ParamAffine::instantiate(const std::map<std::string, Rational>& values) const {
  return ParamAffine(bind_unknowns(values)).to_numeric();
}

ParamAffine& ParamAffine::operator+=(const ParamAffine& other) {
  for (const auto& [name, coeff] : other.coeffs) coeffs[name] += coeff;
  constant += other.constant;
  drop_zeros();
  return *this;
}

ParamAffine& ParamAffine::operator-=(const ParamAffine& other) {
  for (const auto& [name, coeff] : other.coeffs) coeffs[name] -= coeff;
  constant -= other.constant;
  drop_zeros();
  return *this;
}

ParamAffine& ParamAffine::operator*=(const Rational& k) {
  for (auto& [name, coeff] : coeffs) coeff *= k;
  constant *= k;
  drop_zeros();
  return *this;
}

ParamAffine& ParamAffine::add_constant(const LinearExpr& unknowns) {
  constant += unknowns;
  return *this;
}

ParamAffine ParamAffine::substitute(const std::string& var, const LinearExpr& replacement) const {
  auto it = coeffs.find(var);
  if (it == coeffs.end()) return *this;
  ParamAffine out = *this;
  LinearExpr scale = it->second;
  out.coeffs.erase(var);
  for (const auto& [name, k] : replacement.terms()) out.coeffs[name] += scale * k;
  out.constant += scale * replacement.constant();
  out.drop_zeros();
  return out;
}

ParamAffine ParamAffine::bind(const std::map<std::string, Rational>& values) const {
  ParamAffine out;
  out.constant = constant;
  for (const auto& [name, coeff] : coeffs) {
    auto it = values.find(name);
    if (it == values.end()) out.coeffs[name] = coeff;
    else out.constant += coeff * it->second;
  }
  out.drop_zeros();
  return out;
}

ParamAffine ParamAffine::bind_unknowns(const std::map<std::string, Rational>& values) const {
  auto resolve = [&values](const LinearExpr& e) {
    LinearExpr bound = e.bind(values);
    if (!bound.is_constant()) throw DimensionError("unknown without a value in " + e.to_string());
    return bound;
  };
  ParamAffine out;
  for (const auto& [name, coeff] : coeffs) out.coeffs[name] = resolve(coeff);
  out.constant = resolve(constant);
  out.drop_zeros();
  return out;
}

void ParamAffine::drop_zeros() {
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    if (it->second == LinearExpr()) it = coeffs.erase(it);
    else ++it;
  }
}

FarkasAssertion farkas_encode(const Polyhedron& H, const std::vector<std::string>& vars,
                              const std::map<std::string, LinearExpr>& c, const LinearExpr& d,
                              const std::string& prefix) {
  for (const auto& [name, coeff] : c) {
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) {
      throw DimensionError("coefficient for " + name + " has no matching polyhedron column");
    }
  }
  DenseSystem sys = H.dense(vars);
  FarkasAssertion out;
  for (std::size_t i = 0; i < sys.A.size(); ++i) out.multipliers.push_back(prefix + std::to_string(i));
  for (std::size_t j = 0; j < vars.size(); ++j) {
    // sum_i A_ij xi_i - c_j = 0
    LinearExpr row;
    for (std::size_t i = 0; i < sys.A.size(); ++i) {
      if (sgn(sys.A[i][j]) != 0) row.add_term(out.multipliers[i], sys.A[i][j]);
    }
    auto it = c.find(vars[j]);
    if (it != c.end()) row -= it->second;
    out.constraints.push_back({row.homogeneous(), Relation::Eq, -row.constant(), vars[j]});
  }
  LinearExpr dual;
  for (std::size_t i = 0; i < sys.b.size(); ++i) {
    if (sgn(sys.b[i]) != 0) dual.add_term(out.multipliers[i], sys.b[i]);
  }
  dual -= d;
  out.constraints.push_back({dual.homogeneous(), Relation::Le, -dual.constant(), "bound"});
  return out;
}

void add_to(LPProblem& lp, const FarkasAssertion& assertion, const std::string& tag) {
  for (const auto& m : assertion.multipliers) lp.add_variable(m, true);
  for (const auto& c : assertion.constraints) lp.add_constraint(c.form, c.rel, c.rhs, tag + " " + c.tag);
}

namespace {

LPProblem feasibility_lp(const Polyhedron& H) {
  LPProblem lp;
  for (const auto& v : H.variables()) lp.add_variable(v);
  for (const auto& row : H.rows()) lp.add_constraint(row.lhs, Relation::Le, row.rhs);
  if (H.trivially_empty()) lp.add_constraint(LinearExpr(), Relation::Le, -1);
  return lp;
}

}  // namespace

bool is_empty(const Polyhedron& H) {
  if (H.trivially_empty()) return true;
  if (H.is_universe()) return false;
  return !lp_solve(feasibility_lp(H)).feasible();
}

InclusionResult polyhedron_includes(const Polyhedron& H, const LinearExpr& form) {
  LPProblem lp = feasibility_lp(H);
  for (const auto& [name, coeff] : form.terms()) lp.add_variable(name);
  lp.set_objective(Sense::Maximize, form.homogeneous());
  LPResult res = lp_solve(lp);
  InclusionResult out;
  if (res.status == LPResult::Status::Infeasible) throw EmptyPolyhedronError("polyhedron is empty: " + H.to_string());
  if (res.status == LPResult::Status::Feasible) {
    out.max_value = *res.optimum + form.constant();
    out.holds = *out.max_value <= 0;
    out.witness = res.values;
    return out;
  }
  // Unbounded: exhibit a point with form(x) >= 1 as the witness.
  LPProblem probe = feasibility_lp(H);
  for (const auto& [name, coeff] : form.terms()) probe.add_variable(name);
  probe.add_constraint(-form.homogeneous(), Relation::Le, form.constant() - 1);
  LPResult point = lp_solve(probe);
  out.holds = false;
  out.witness = point.values;
  return out;
}

bool polyhedron_includes(const Polyhedron& H, const LinearExpr& c, const Rational& d) {
  return polyhedron_includes(H, c.homogeneous() + LinearExpr(c.constant() - d)).holds;
}

std::optional<std::pair<Rational, std::vector<Rational>>> farkas_dual(const Polyhedron& H, const LinearExpr& c) {
  std::set<std::string> names = H.variables();
  for (const auto& [name, coeff] : c.terms()) names.insert(name);
  std::vector<std::string> vars(names.begin(), names.end());
  std::map<std::string, LinearExpr> coeffs;
  for (const auto& [name, coeff] : c.terms()) coeffs[name] = LinearExpr(coeff);
  FarkasAssertion fa = farkas_encode(H, vars, coeffs, LinearExpr(), "xi");
  LPProblem lp;
  for (const auto& m : fa.multipliers) lp.add_variable(m, true);
  DenseSystem sys = H.dense(vars);
  LinearExpr objective;
  for (std::size_t i = 0; i < fa.multipliers.size(); ++i) {
    if (sgn(sys.b[i]) != 0) objective.add_term(fa.multipliers[i], sys.b[i]);
  }
  for (std::size_t k = 0; k + 1 < fa.constraints.size(); ++k) {
    lp.add_constraint(fa.constraints[k].form, fa.constraints[k].rel, fa.constraints[k].rhs);
  }
  lp.set_objective(Sense::Minimize, objective);
  LPResult res = lp_solve(lp);
  if (!res.feasible()) return std::nullopt;
  std::vector<Rational> xi;
  for (const auto& m : fa.multipliers) xi.push_back(res.value(m));
  return std::make_pair(*res.optimum, xi);
}

}  // namespace dsmv
