#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsmv/lp.hpp"
#include "dsmv/polyhedron.hpp"

namespace dsmv {

/// Affine form over program variables whose coefficients are affine in unknown
/// (template) parameters: sum_v coeff[v](theta) * v + constant(theta).
/// A purely numeric form has constant coefficient expressions.
struct ParamAffine {
  std::map<std::string, LinearExpr> coeffs;
  LinearExpr constant;

  static ParamAffine numeric(const LinearExpr& form);
  bool is_numeric() const;
  /// The numeric form; throws DimensionError if some coefficient still mentions unknowns.
  LinearExpr to_numeric() const;
  /// Instantiates unknowns with values (unknowns missing from `values` are an error).
  LinearExpr instantiate(const std::map<std::string, Rational>& values) const;

  ParamAffine& operator+=(const ParamAffine& other);
  ParamAffine& operator-=(const ParamAffine& other);
  ParamAffine& operator*=(const Rational& k);
  friend ParamAffine operator+(ParamAffine x, const ParamAffine& y) { return x += y; }
  friend ParamAffine operator-(ParamAffine x, const ParamAffine& y) { return x -= y; }
  friend ParamAffine operator*(ParamAffine x, const Rational& k) { return x *= k; }
  friend ParamAffine operator*(const Rational& k, ParamAffine x) { return x *= k; }

  /// Adds an unknown-only term to the constant part.
  ParamAffine& add_constant(const LinearExpr& unknowns);

  /// Simultaneous substitution var <- replacement, with numeric replacement coefficients.
  ParamAffine substitute(const std::string& var, const LinearExpr& replacement) const;
  /// Replaces every unknown inside the coefficients by its value.
  ParamAffine bind_unknowns(const std::map<std::string, Rational>& values) const;
  /// Replaces variables by fixed values.
  ParamAffine bind(const std::map<std::string, Rational>& values) const;

  void drop_zeros();
};

/// The constraints xi >= 0, A^T xi = c, b^T xi <= d for H = {x | A x <= b}.
struct FarkasAssertion {
  std::vector<std::string> multipliers;
  std::vector<LPConstraint> constraints;
};

/// Encodes "c^T x <= d for every x in H" with fresh multipliers `prefix`0, `prefix`1, ...
/// `c` maps variable names to (template-)linear coefficients; the variable columns are
/// `vars` (H's variables must be among them). Throws DimensionError if `c` mentions a
/// variable outside `vars`.
FarkasAssertion farkas_encode(const Polyhedron& H, const std::vector<std::string>& vars,
                              const std::map<std::string, LinearExpr>& c, const LinearExpr& d,
                              const std::string& prefix);

/// Adds the assertion's multipliers and constraints to `lp`.
void add_to(LPProblem& lp, const FarkasAssertion& assertion, const std::string& tag);

bool is_empty(const Polyhedron& H);

struct InclusionResult {
  bool holds = false;
  std::optional<Rational> max_value;               // sup of c^T x over H (nullopt: unbounded)
  std::map<std::string, Rational> witness;         // maximizer or a violating point when !holds
};

/// Decides H subset-of {x | form(x) <= 0} by maximizing form over H.
/// Throws EmptyPolyhedronError if H is empty.
InclusionResult polyhedron_includes(const Polyhedron& H, const LinearExpr& form);

/// Same query in the (c, d) form: H subset-of {x | c^T x <= d}.
bool polyhedron_includes(const Polyhedron& H, const LinearExpr& c, const Rational& d);

/// Minimal b^T xi subject to xi >= 0 and A^T xi = c (the Farkas dual of max c^T x over H);
/// nullopt when no multipliers exist.
std::optional<std::pair<Rational, std::vector<Rational>>> farkas_dual(const Polyhedron& H, const LinearExpr& c);

}  // namespace dsmv
