#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsmv/rational.hpp"

namespace dsmv {

/// Affine form sum_i coeff_i * var_i + constant over named variables.
/// Zero coefficients are never stored, so structural equality is semantic equality.
class LinearExpr {
 public:
  using Terms = std::map<std::string, Rational>;

  LinearExpr() = default;
  explicit LinearExpr(Rational constant) : constant_(std::move(constant)) {}
  static LinearExpr variable(const std::string& name, const Rational& coeff = 1);

  const Terms& terms() const { return terms_; }
  const Rational& constant() const { return constant_; }
  Rational coefficient(const std::string& name) const;

  bool is_constant() const { return terms_.empty(); }
  std::set<std::string> variables() const;

  void add_term(const std::string& name, const Rational& coeff);
  void set_constant(Rational value) { constant_ = std::move(value); }

  /// The same form with its constant dropped.
  LinearExpr homogeneous() const;

  /// Replaces `name` by `replacement` (sum_i c_i v_i)[name <- e].
  LinearExpr substitute(const std::string& name, const LinearExpr& replacement) const;

  /// Evaluates with `lookup(name)` providing every variable's value.
  template <typename Lookup>
  Rational evaluate(Lookup&& lookup) const {
    Rational sum = constant_;
    for (const auto& [name, coeff] : terms_) sum += coeff * lookup(name);
    return sum;
  }

  /// Partial evaluation: variables present in `values` are replaced by constants.
  LinearExpr bind(const std::map<std::string, Rational>& values) const;

  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr& operator*=(const Rational& factor);

  friend LinearExpr operator+(LinearExpr lhs, const LinearExpr& rhs) { return lhs += rhs; }
  friend LinearExpr operator-(LinearExpr lhs, const LinearExpr& rhs) { return lhs -= rhs; }
  friend LinearExpr operator*(LinearExpr lhs, const Rational& k) { return lhs *= k; }
  friend LinearExpr operator*(const Rational& k, LinearExpr rhs) { return rhs *= k; }
  friend LinearExpr operator-(LinearExpr e) { return e *= Rational(-1); }

  friend bool operator==(const LinearExpr& lhs, const LinearExpr& rhs) {
    return lhs.constant_ == rhs.constant_ && lhs.terms_ == rhs.terms_;
  }

  /// Renders as e.g. "6*x - 3/299*y + 5". Variable order follows `order` when given,
  /// otherwise alphabetical.
  std::string to_string(const std::vector<std::string>& order = {}) const;

 private:
  Terms terms_;
  Rational constant_{0};
};

}  // namespace dsmv
