#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsmv/cfg.hpp"
#include "dsmv/farkas.hpp"
#include "dsmv/invariant.hpp"

namespace dsmv {

/// Per-label affine map together with its parameters epsilon, [a, b] and c.
struct DSMMap {
  std::map<Label, LinearExpr> eta;
  Rational epsilon{1};
  Rational a{0};
  Rational b{0};
  Rational c{0};

  /// Certificate text (.dsm): parameter lines followed by `eta <label>: <expr>` lines.
  std::string render(const std::vector<std::string>& order = {}) const;
  /// Multiplies every expression and parameter by `k` > 0.
  DSMMap scaled(const Rational& k) const;
};

DSMMap parse_dsm(std::string_view text);

enum class Condition { D1, D2, D3, D4, D5 };
std::string to_string(Condition cond);

/// Parameters as affine forms in unknowns: numeric for checking, symbolic for synthesis.
struct DSMParams {
  LinearExpr epsilon;
  LinearExpr a;
  LinearExpr b;
  LinearExpr c;

  static DSMParams of(const DSMMap& m);
};

/// "form(x) <= 0 for every x in domain", one atomic proof obligation.
struct Obligation {
  Condition cond = Condition::D1;
  Label label = 0;
  std::string transition;  // e.g. "5->6" or "head" for the lower bound at the entry
  std::string what;        // which inequality, e.g. "diff >= a"
  std::size_t disjunct = 0;
  Polyhedron domain;
  ParamAffine form;
};

/// Enumerates every inequality that conditions D1-D4 (and D5 when `with_lower_bound`)
/// impose on `eta` over the loop sub-CFG, in the order label, transition, condition,
/// disjunct. Empty invariant disjuncts are skipped. Throws CoverageError when a label
/// has no expression.
std::vector<Obligation> dsm_obligations(const std::map<Label, ParamAffine>& eta, const DSMParams& params,
                                        const CFG& loop, const Invariant& inv, bool with_lower_bound);

/// Sum over the sampling support of prob * eta_target(u(x, mu)); sampling variables are
/// replaced by their expectations, which is exact for affine forms.
LinearExpr expected_post(const LinearExpr& eta_target, const Update& upd, const std::vector<std::string>& rvars,
                         const DistMap& dists);

struct DiffRange {
  std::optional<Rational> min;  // nullopt: unbounded below
  std::optional<Rational> max;  // nullopt: unbounded above
};

/// Extremes of eta_target(u(x, mu)) - eta_src(x) over the support and over `domain`
/// (the whole space when null).
DiffRange extreme_post_diffs(const LinearExpr& eta_src, const LinearExpr& eta_target, const Update& upd,
                             const std::vector<std::string>& rvars, const DistMap& dists,
                             const PolyUnion* domain = nullptr);

struct Violation {
  Condition cond = Condition::D1;
  Label label = 0;
  std::string transition;
  std::string what;
  std::size_t disjunct = 0;
  std::optional<Rational> worst;                // sup of the violated form (nullopt: unbounded)
  std::map<std::string, Rational> witness;      // a point of the domain that violates it
};

struct CheckReport {
  std::vector<Violation> violations;
  std::size_t obligations = 0;

  bool pass() const { return violations.empty(); }
  std::string to_string(const std::vector<std::string>& order = {}) const;
};

/// Exact check of D1-D5 for `candidate` on the loop sub-CFG; every violation is reported.
CheckReport check_dsm(const DSMMap& candidate, const CFG& loop, const Invariant& inv);
/// As check_dsm without the lower bound at the entry (D5).
CheckReport check_partial_dsm(const DSMMap& candidate, const CFG& loop, const Invariant& inv);

}  // namespace dsmv
