#include "dsmv/dsm.hpp"

#include <algorithm>
#include <sstream>

#include "dsmv/errors.hpp"
#include "parser.hpp"

namespace dsmv {

std::string to_string(Condition cond) {
  switch (cond) {
    case Condition::D1: return "D1";
    case Condition::D2: return "D2";
    case Condition::D3: return "D3";
    case Condition::D4: return "D4";
    case Condition::D5: return "D5";
  }
  return "?";
}

std::string DSMMap::render(const std::vector<std::string>& order) const {
  std::ostringstream out;
  out << "eps " << to_string(epsilon) << "\n"
      << "a " << to_string(a) << "\n"
      << "b " << to_string(b) << "\n"
      << "c " << to_string(c) << "\n";
  for (const auto& [l, e] : eta) out << "eta " << l << ": " << e.to_string(order) << "\n";
  return out.str();
}

DSMMap DSMMap::scaled(const Rational& k) const {
  DSMMap out = *this;
  for (auto& [l, e] : out.eta) e *= k;
  out.epsilon *= k;
  out.a *= k;
  out.b *= k;
  out.c *= k;
  return out;
}

DSMMap parse_dsm(std::string_view text) {
  using detail::Tok;
  detail::TokenStream ts(detail::tokenize(text));
  DSMMap m;
  std::map<std::string, bool> seen;
  while (!ts.at(Tok::End)) {
    const auto& key = ts.expect(Tok::Ident, "'eps', 'a', 'b', 'c' or 'eta'");
    if (key.text == "eta") {
      const auto& num = ts.expect(Tok::Number, "label number");
      Rational value = parse_rational(num.text);
      if (!is_integer(value)) ts.fail_at(num, "label must be an integer");
      Label l = static_cast<Label>(to_int64(value));
      ts.expect(Tok::Colon, "':'");
      if (m.eta.count(l)) throw SemanticError("label " + std::to_string(l) + " has two expressions");
      m.eta[l] = ts.parse_expr();
    } else if (key.text == "eps" || key.text == "epsilon" || key.text == "a" || key.text == "b" ||
               key.text == "c") {
      std::string name = key.text == "epsilon" ? "eps" : key.text;
      if (seen[name]) ts.fail_at(key, "parameter given twice");
      seen[name] = true;
      ts.accept(Tok::Eq);
      Rational value = ts.parse_number();
      if (name == "eps") m.epsilon = value;
      else if (name == "a") m.a = value;
      else if (name == "b") m.b = value;
      else m.c = value;
    } else {
      ts.fail_at(key, "unknown certificate entry");
    }
    ts.accept(Tok::Semi);
  }
  if (m.epsilon <= 0) throw SemanticError("eps must be positive");
  if (m.b < m.a) throw SemanticError("interval [a, b] is empty");
  return m;
}

DSMParams DSMParams::of(const DSMMap& m) {
  return DSMParams{LinearExpr(m.epsilon), LinearExpr(m.a), LinearExpr(m.b), LinearExpr(m.c)};
}

namespace {

ParamAffine post(const ParamAffine& eta, const Update& upd, const std::map<std::string, Rational>& mu) {
  if (upd.is_identity()) return eta;
  return eta.substitute(upd.var, upd.rhs.bind(mu));
}

std::map<std::string, Rational> expectations(const std::vector<std::string>& rvars, const DistMap& dists) {
  std::map<std::string, Rational> out;
  for (const auto& r : rvars) {
    auto it = dists.find(r);
    if (it != dists.end()) out[r] = it->second.expectation();
  }
  return out;
}

ParamAffine constant_form(const LinearExpr& unknowns) {
  ParamAffine p;
  p.constant = unknowns;
  return p;
}

class ObligationSink {
 public:
  ObligationSink(const DSMParams& params, std::vector<Obligation>& out) : params_(params), out_(out) {}

  void set_site(Condition cond, Label label, std::string transition, std::size_t disjunct, const Polyhedron* domain) {
    cond_ = cond;
    label_ = label;
    transition_ = std::move(transition);
    disjunct_ = disjunct;
    domain_ = domain;
  }

  void emit(const std::string& what, ParamAffine form) {
    out_.push_back({cond_, label_, transition_, what, disjunct_, *domain_, std::move(form)});
  }

  // a <= diff <= b
  void bounded(const ParamAffine& diff, const std::string& name) {
    emit(name + " >= a", constant_form(params_.a) - diff);
    emit(name + " <= b", diff - constant_form(params_.b));
  }

  // value <= -eps
  void decreasing(const ParamAffine& value, const std::string& name) {
    emit(name + " <= -eps", value + constant_form(params_.epsilon));
  }

 private:
  const DSMParams& params_;
  std::vector<Obligation>& out_;
  Condition cond_ = Condition::D1;
  Label label_ = 0;
  std::string transition_;
  std::size_t disjunct_ = 0;
  const Polyhedron* domain_ = nullptr;
};

}  // namespace

std::vector<Obligation> dsm_obligations(const std::map<Label, ParamAffine>& eta, const DSMParams& params,
                                        const CFG& loop, const Invariant& inv, bool with_lower_bound) {
  for (Label l : loop.labels()) {
    if (!eta.count(l)) throw CoverageError("no expression for label " + std::to_string(l));
  }
  std::vector<Obligation> out;
  ObligationSink sink(params, out);
  auto nonempty_parts = [](const PolyUnion& pred) {
    std::vector<std::pair<std::size_t, Polyhedron>> parts;
    for (std::size_t k = 0; k < pred.disjuncts().size(); ++k) {
      if (!is_empty(pred.disjuncts()[k])) parts.emplace_back(k, pred.disjuncts()[k]);
    }
    return parts;
  };
  auto mu_name = [](const std::map<std::string, Rational>& mu) {
    std::string s;
    for (const auto& [r, v] : mu) s += (s.empty() ? "" : ",") + r + "=" + to_string(v);
    return s.empty() ? std::string("diff") : "diff[" + s + "]";
  };

  for (Label l : loop.labels()) {
    if (l == loop.l_out) continue;
    const ParamAffine& here = eta.at(l);
    auto parts = nonempty_parts(inv.of(l));
    auto out_idx = loop.outgoing(l);
    switch (loop.kind(l)) {
      case LabelKind::Assign: {
        const Transition& t = loop.transitions[out_idx.at(0)];
        auto points = sample_points(t.update, loop.rvars, loop.dists);
        std::vector<std::pair<ParamAffine, std::string>> diffs;
        ParamAffine expected;
        for (const auto& mu : points) {
          ParamAffine d = post(eta.at(t.dst), t.update, mu.values) - here;
          expected += d * mu.prob;
          diffs.emplace_back(std::move(d), mu_name(mu.values));
        }
        for (const auto& [k, D] : parts) {
          sink.set_site(Condition::D1, l, t.describe(), k, &D);
          for (const auto& [d, name] : diffs) sink.bounded(d, name);
          sink.decreasing(expected, "E[diff]");
        }
        break;
      }
      case LabelKind::Branch:
        for (std::size_t i : out_idx) {
          const Transition& t = loop.transitions[i];
          ParamAffine d = eta.at(t.dst) - here;
          for (const auto& [k, D] : parts) {
            for (const auto& g : t.guard.disjuncts()) {
              Polyhedron H = D.intersect(g);
              if (is_empty(H)) continue;
              sink.set_site(Condition::D2, l, t.describe(), k, &H);
              sink.bounded(d, "diff");
              sink.decreasing(d, "diff");
            }
          }
        }
        break;
      case LabelKind::Nondet:
        for (std::size_t i : out_idx) {
          const Transition& t = loop.transitions[i];
          ParamAffine d = eta.at(t.dst) - here;
          for (const auto& [k, D] : parts) {
            sink.set_site(Condition::D3, l, t.describe(), k, &D);
            sink.bounded(d, "diff");
            sink.decreasing(d, "diff");
          }
        }
        break;
      case LabelKind::Prob: {
        const Transition& t1 = loop.transitions[out_idx.at(0)];
        const Transition& t2 = loop.transitions[out_idx.at(1)];
        ParamAffine d1 = eta.at(t1.dst) - here;
        ParamAffine d2 = eta.at(t2.dst) - here;
        ParamAffine mix = d1 * t1.prob + d2 * t2.prob;
        for (const auto& [k, D] : parts) {
          sink.set_site(Condition::D4, l, t1.describe() + "|" + t2.describe(), k, &D);
          sink.bounded(d1, "diff " + t1.describe());
          sink.bounded(d2, "diff " + t2.describe());
          sink.decreasing(mix, "E[diff]");
        }
        break;
      }
      case LabelKind::Terminal:
        break;
    }
    if (with_lower_bound && l == loop.l_in && loop.kind(l) == LabelKind::Branch) {
      const Transition* enter = nullptr;
      for (std::size_t i : out_idx) {
        if (loop.transitions[i].then_edge) enter = &loop.transitions[i];
      }
      for (const auto& [k, D] : parts) {
        for (const auto& g : enter->guard.disjuncts()) {
          Polyhedron H = D.intersect(g);
          if (is_empty(H)) continue;
          sink.set_site(Condition::D5, l, "head", k, &H);
          sink.emit("eta >= c", constant_form(params.c) - here);
        }
      }
    }
  }
  return out;
}

LinearExpr expected_post(const LinearExpr& eta_target, const Update& upd, const std::vector<std::string>& rvars,
                         const DistMap& dists) {
  // Check that every sampled variable has a finite distribution.
  sample_points(upd, rvars, dists);
  return post(ParamAffine::numeric(eta_target), upd, expectations(rvars, dists)).to_numeric();
}

DiffRange extreme_post_diffs(const LinearExpr& eta_src, const LinearExpr& eta_target, const Update& upd,
                             const std::vector<std::string>& rvars, const DistMap& dists, const PolyUnion* domain) {
  PolyUnion space = domain ? *domain : PolyUnion::universe();
  DiffRange range;
  bool first = true;
  bool lo_unbounded = false;
  bool hi_unbounded = false;
  for (const auto& mu : sample_points(upd, rvars, dists)) {
    LinearExpr diff = post(ParamAffine::numeric(eta_target), upd, mu.values).to_numeric() - eta_src;
    for (const auto& D : space.disjuncts()) {
      if (is_empty(D)) continue;
      InclusionResult hi = polyhedron_includes(D, diff);
      InclusionResult lo = polyhedron_includes(D, -diff);
      if (!hi.max_value) hi_unbounded = true;
      else if (first || *hi.max_value > *range.max) range.max = *hi.max_value;
      if (!lo.max_value) lo_unbounded = true;
      else if (first || -*lo.max_value < *range.min) range.min = -*lo.max_value;
      first = false;
    }
  }
  if (lo_unbounded) range.min.reset();
  if (hi_unbounded) range.max.reset();
  return range;
}

std::string CheckReport::to_string(const std::vector<std::string>& order) const {
  std::ostringstream out;
  if (pass()) {
    out << "pass (" << obligations << " obligations)\n";
    return out.str();
  }
  out << "fail: " << violations.size() << " of " << obligations << " obligations violated\n";
  for (const auto& v : violations) {
    out << "  " << dsmv::to_string(v.cond) << " at " << v.label << " (" << v.transition << ", disjunct " << v.disjunct
        << "): " << v.what << " fails; sup = " << (v.worst ? dsmv::to_string(*v.worst) : std::string("+inf"))
        << " > 0; witness {";
    bool first = true;
    auto print = [&](const std::string& name, const Rational& value) {
      out << (first ? "" : ", ") << name << "=" << dsmv::to_string(value);
      first = false;
    };
    for (const auto& name : order) {
      auto it = v.witness.find(name);
      if (it != v.witness.end()) print(name, it->second);
    }
    for (const auto& [name, value] : v.witness) {
      if (std::find(order.begin(), order.end(), name) == order.end()) print(name, value);
    }
    out << "}\n";
  }
  return out.str();
}

namespace {

CheckReport check_impl(const DSMMap& candidate, const CFG& loop, const Invariant& inv, bool with_lower_bound) {
  std::map<Label, ParamAffine> eta;
  for (const auto& [l, e] : candidate.eta) eta[l] = ParamAffine::numeric(e);
  auto obligations = dsm_obligations(eta, DSMParams::of(candidate), loop, inv, with_lower_bound);
  CheckReport report;
  report.obligations = obligations.size();
  for (const auto& ob : obligations) {
    InclusionResult r = polyhedron_includes(ob.domain, ob.form.to_numeric());
    if (r.holds) continue;
    report.violations.push_back({ob.cond, ob.label, ob.transition, ob.what, ob.disjunct, r.max_value, r.witness});
  }
  std::stable_sort(report.violations.begin(), report.violations.end(), [](const Violation& x, const Violation& y) {
    if (x.label != y.label) return x.label < y.label;
    return x.cond < y.cond;
  });
  return report;
}

}  // namespace

CheckReport check_dsm(const DSMMap& candidate, const CFG& loop, const Invariant& inv) {
  return check_impl(candidate, loop, inv, true);
}

CheckReport check_partial_dsm(const DSMMap& candidate, const CFG& loop, const Invariant& inv) {
  return check_impl(candidate, loop, inv, false);
}

}  // namespace dsmv
