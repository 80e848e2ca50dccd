#pragma once

#include <map>
#include <string>

#include "dsmv/dsm.hpp"
#include "dsmv/lp.hpp"

namespace dsmv {

/// Unknown coefficients alpha_<label>_<var> and beta_<label> per label, plus the interval
/// ends. epsilon and c are fixed to 1 and 0.
struct Template {
  std::map<Label, ParamAffine> eta;
  LinearExpr a;
  LinearExpr b;

  static Template for_loop(const CFG& loop);
  DSMParams params() const;
};

/// The conjunction of all Farkas assertions for the template, with b >= a + 1 and the
/// objective "minimize b - a". Constraint order follows the obligation order.
LPProblem assemble_lp(const Template& tmpl, const CFG& loop, const Invariant& inv);

struct SynthesisOutcome {
  enum class Status { Success, Fail };
  enum class Reason { None, LPInfeasible, EmptyInvariant, UnsupportedFeature };

  Status status = Status::Fail;
  Reason reason = Reason::None;
  std::string message;
  DSMMap map;            // Success only; already re-checked by check_dsm
  CheckReport self_check;
  std::size_t lp_rows = 0;
  std::size_t lp_columns = 0;
  std::string lp_text;   // filled when requested

  bool success() const { return status == Status::Success; }
};

std::string to_string(SynthesisOutcome::Reason reason);

struct SynthesisOptions {
  bool keep_lp_text = false;
};

/// Template + Farkas + LP synthesis of a DSM-map for the loop sub-CFG.
/// A Success outcome has always passed check_dsm against `inv`.
SynthesisOutcome synthesize_dsm(const CFG& loop, const Invariant& inv, const SynthesisOptions& options = {});

}  // namespace dsmv
