#include "dsmv/invariant.hpp"

#include <sstream>

#include "dsmv/errors.hpp"
#include "dsmv/farkas.hpp"
#include "parser.hpp"

namespace dsmv {

const PolyUnion& Invariant::of(Label l) const {
  static const PolyUnion kTrue = PolyUnion::universe();
  auto it = at.find(l);
  return it == at.end() ? kTrue : it->second;
}

std::string Invariant::render(const std::vector<std::string>& order) const {
  std::ostringstream out;
  for (const auto& [l, pred] : at) out << "inv " << l << ": " << pred.to_string(order) << "\n";
  return out.str();
}

Invariant load_invariant(std::string_view text, const CFG& cfg) {
  using detail::Tok;
  detail::TokenStream ts(detail::tokenize(text));
  Invariant inv;
  std::map<Label, bool> given;
  while (!ts.at(Tok::End)) {
    ts.expect_keyword("inv");
    const auto& num = ts.expect(Tok::Number, "label number");
    Rational value = parse_rational(num.text);
    if (!is_integer(value)) ts.fail_at(num, "label must be an integer");
    Label l = static_cast<Label>(to_int64(value));
    if (!cfg.contains(l)) {
      throw UnknownLabelError(std::to_string(num.line) + ":" + std::to_string(num.column) + ": label " +
                              std::to_string(l) + " does not exist in the program");
    }
    if (given[l]) throw SemanticError("label " + std::to_string(l) + " has two invariant entries");
    given[l] = true;
    ts.expect(Tok::Colon, "':'");
    inv.at[l] = to_dnf(*ts.parse_bexpr());
    ts.accept(Tok::Semi);
  }
  for (Label l : cfg.labels()) inv.at.emplace(l, PolyUnion::universe());
  return inv;
}

Invariant guard_default_invariant(const CFG& cfg) {
  std::map<Label, std::vector<const Transition*>> incoming;
  for (const auto& t : cfg.transitions) incoming[t.dst].push_back(&t);
  Invariant inv;
  for (Label l : cfg.labels()) {
    PolyUnion pred = PolyUnion::universe();
    const auto& in = incoming[l];
    bool all_branch = l != cfg.l_in && !in.empty();
    for (const auto* t : in) all_branch = all_branch && cfg.kind(t->src) == LabelKind::Branch;
    if (all_branch) {
      pred = PolyUnion::empty();
      for (const auto* t : in) pred = pred.unite(t->guard);
    }
    inv.at[l] = pred;
  }
  return inv;
}

Invariant restrict_to(const Invariant& inv, const CFG& cfg) {
  Invariant out;
  for (Label l : cfg.labels()) out.at[l] = inv.of(l);
  return out;
}

namespace {

// Does every point of D, mapped by `upd` under sample values `mu`, satisfy all rows of Q?
bool image_within(const Polyhedron& D, const Update& upd, const std::map<std::string, Rational>& mu,
                  const Polyhedron& Q) {
  for (const auto& row : Q.rows()) {
    LinearExpr form = row.lhs - LinearExpr(row.rhs);
    if (!upd.is_identity()) form = form.substitute(upd.var, upd.rhs.bind(mu));
    if (!polyhedron_includes(D, form).holds) return false;
  }
  return !Q.trivially_empty();
}

}  // namespace

std::vector<InductivenessViolation> check_inductive(const Invariant& inv, const CFG& cfg) {
  std::vector<InductivenessViolation> out;
  for (const auto& t : cfg.transitions) {
    const PolyUnion& target = inv.of(t.dst);
    if (target.is_universe()) continue;
    std::vector<Polyhedron> sources;
    const auto& src_disjuncts = inv.of(t.src).disjuncts();
    for (std::size_t k = 0; k < src_disjuncts.size(); ++k) {
      if (cfg.kind(t.src) == LabelKind::Branch) {
        for (const auto& g : t.guard.disjuncts()) sources.push_back(src_disjuncts[k].intersect(g));
      } else {
        sources.push_back(src_disjuncts[k]);
      }
    }
    Update upd = cfg.kind(t.src) == LabelKind::Assign ? t.update : Update{};
    auto points = sample_points(upd, cfg.rvars, cfg.dists);
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const Polyhedron& D = sources[k];
      if (is_empty(D)) continue;
      for (const auto& mu : points) {
        bool ok = false;
        for (const auto& Q : target.disjuncts()) {
          if (image_within(D, upd, mu.values, Q)) {
            ok = true;
            break;
          }
        }
        if (!ok) {
          std::string sample;
          for (const auto& [r, v] : mu.values) sample += " " + r + "=" + to_string(v);
          out.push_back({t.src, t.dst, k,
                         "image of {" + D.to_string(cfg.pvars) + "}" + (sample.empty() ? "" : " with" + sample) +
                             " leaves I(" + std::to_string(t.dst) + ")"});
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace dsmv
