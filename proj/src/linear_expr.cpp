#include "dsmv/linear_expr.hpp"

#include <algorithm>

namespace dsmv {

LinearExpr LinearExpr::variable(const std::string& name, const Rational& coeff) {
  LinearExpr e;
  e.add_term(name, coeff);
  return e;
}

Rational LinearExpr::coefficient(const std::string& name) const {
  auto it = terms_.find(name);
  return it == terms_.end() ? Rational(0) : it->second;
}

std::set<std::string> LinearExpr::variables() const {
  std::set<std::string> out;
  for (const auto& [name, coeff] : terms_) out.insert(name);
  return out;
}

void LinearExpr::add_term(const std::string& name, const Rational& coeff) {
  if (coeff == 0) return;
  auto [it, inserted] = terms_.emplace(name, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

LinearExpr LinearExpr::homogeneous() const {
  LinearExpr e = *this;
  e.constant_ = 0;
  return e;
}

LinearExpr LinearExpr::substitute(const std::string& name, const LinearExpr& replacement) const {
  auto it = terms_.find(name);
  if (it == terms_.end()) return *this;
  Rational coeff = it->second;
  LinearExpr out = *this;
  out.terms_.erase(name);
  out += replacement * coeff;
  return out;
}

LinearExpr LinearExpr::bind(const std::map<std::string, Rational>& values) const {
  LinearExpr out(constant_);
  for (const auto& [name, coeff] : terms_) {
    if (auto it = values.find(name); it != values.end()) {
      out.constant_ += coeff * it->second;
    } else {
      out.terms_.emplace(name, coeff);
    }
  }
  return out;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  for (const auto& [name, coeff] : other.terms_) add_term(name, coeff);
  constant_ += other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  for (const auto& [name, coeff] : other.terms_) add_term(name, -coeff);
  constant_ -= other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator*=(const Rational& factor) {
  if (factor == 0) {
    terms_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& [name, coeff] : terms_) coeff *= factor;
  constant_ *= factor;
  return *this;
}

std::string LinearExpr::to_string(const std::vector<std::string>& order) const {
  std::vector<std::pair<std::string, Rational>> items;
  for (const auto& name : order) {
    if (auto it = terms_.find(name); it != terms_.end()) items.emplace_back(*it);
  }
  for (const auto& entry : terms_) {
    if (std::find(order.begin(), order.end(), entry.first) == order.end()) items.emplace_back(entry);
  }
  std::string out;
  auto append = [&out](const Rational& value, const std::string& name) {
    Rational magnitude = abs(value);
    if (out.empty()) {
      if (value < 0) out += "-";
    } else {
      out += value < 0 ? " - " : " + ";
    }
    if (name.empty()) {
      out += dsmv::to_string(magnitude);
    } else if (magnitude == 1) {
      out += name;
    } else {
      out += dsmv::to_string(magnitude) + "*" + name;
    }
  };
  for (const auto& [name, coeff] : items) append(coeff, name);
  if (constant_ != 0 || out.empty()) {
    if (out.empty() && constant_ == 0) return "0";
    append(constant_, "");
  }
  return out;
}

}  // namespace dsmv
