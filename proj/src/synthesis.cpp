#include "dsmv/synthesis.hpp"

#include <stdexcept>

#include "dsmv/errors.hpp"

namespace dsmv {

namespace {

const char* const kLow = "dsm_a";
const char* const kHigh = "dsm_b";

std::string alpha(Label l, const std::string& var) { return "alpha_" + std::to_string(l) + "_" + var; }
std::string beta(Label l) { return "beta_" + std::to_string(l); }

}  // namespace

std::string to_string(SynthesisOutcome::Reason reason) {
  switch (reason) {
    case SynthesisOutcome::Reason::None: return "none";
    case SynthesisOutcome::Reason::LPInfeasible: return "lp-infeasible";
    case SynthesisOutcome::Reason::EmptyInvariant: return "empty-invariant-everywhere";
    case SynthesisOutcome::Reason::UnsupportedFeature: return "unsupported-feature";
  }
  return "?";
}

Template Template::for_loop(const CFG& loop) {
  Template t;
  for (Label l : loop.labels()) {
    ParamAffine e;
    for (const auto& v : loop.pvars) e.coeffs[v] = LinearExpr::variable(alpha(l, v));
    e.constant = LinearExpr::variable(beta(l));
    t.eta[l] = std::move(e);
  }
  t.a = LinearExpr::variable(kLow);
  t.b = LinearExpr::variable(kHigh);
  return t;
}

DSMParams Template::params() const { return DSMParams{LinearExpr(1), a, b, LinearExpr(0)}; }

LPProblem assemble_lp(const Template& tmpl, const CFG& loop, const Invariant& inv) {
  LPProblem lp;
  for (const auto& [l, e] : tmpl.eta) {
    for (const auto& v : loop.pvars) lp.add_variable(alpha(l, v));
    lp.add_variable(beta(l));
  }
  lp.add_variable(kLow);
  lp.add_variable(kHigh);
  // b >= a + 1
  lp.add_constraint(tmpl.a - tmpl.b, Relation::Le, -1, "interval");
  auto obligations = dsm_obligations(tmpl.eta, tmpl.params(), loop, inv, true);
  for (std::size_t i = 0; i < obligations.size(); ++i) {
    const Obligation& ob = obligations[i];
    std::string tag = to_string(ob.cond) + " l" + std::to_string(ob.label) + " " + ob.transition + " #" +
                      std::to_string(ob.disjunct) + " " + ob.what;
    FarkasAssertion fa =
        farkas_encode(ob.domain, loop.pvars, ob.form.coeffs, -ob.form.constant, "xi" + std::to_string(i) + "_");
    add_to(lp, fa, tag);
  }
  lp.set_objective(Sense::Minimize, tmpl.b - tmpl.a);
  return lp;
}

SynthesisOutcome synthesize_dsm(const CFG& loop, const Invariant& inv, const SynthesisOptions& options) {
  SynthesisOutcome out;
  bool entry_nonempty = false;
  for (const auto& D : inv.of(loop.l_in).disjuncts()) entry_nonempty = entry_nonempty || !is_empty(D);
  if (!entry_nonempty) {
    out.reason = SynthesisOutcome::Reason::EmptyInvariant;
    out.message = "the invariant at the loop head is empty";
    return out;
  }
  Template tmpl = Template::for_loop(loop);
  LPProblem lp;
  try {
    lp = assemble_lp(tmpl, loop, inv);
  } catch (const UnboundedSupportError& e) {
    out.reason = SynthesisOutcome::Reason::UnsupportedFeature;
    out.message = e.what();
    return out;
  }
  out.lp_rows = lp.constraints().size();
  out.lp_columns = lp.variables().size();
  if (options.keep_lp_text) out.lp_text = lp.to_text();

  LPResult res = lp_solve(lp);
  if (!res.feasible()) {
    out.reason = SynthesisOutcome::Reason::LPInfeasible;
    out.message = "linear program is " + to_string(res.status);
    return out;
  }
  DSMMap m;
  for (const auto& [l, e] : tmpl.eta) m.eta[l] = e.instantiate(res.values);
  m.epsilon = 1;
  m.c = 0;
  m.a = res.value(kLow);
  m.b = res.value(kHigh);
  out.self_check = check_dsm(m, loop, inv);
  if (!out.self_check.pass()) {
    // The LP encodes exactly the checked conditions, so this indicates a defect.
    throw std::logic_error("synthesized map failed its self-check:\n" + out.self_check.to_string(loop.pvars));
  }
  out.status = SynthesisOutcome::Status::Success;
  out.map = std::move(m);
  return out;
}

}  // namespace dsmv
