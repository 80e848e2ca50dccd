#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsmv/frontend.hpp"

namespace dsmv {

enum class LabelKind { Assign, Branch, Prob, Nondet, Terminal };

std::string to_string(LabelKind kind);

/// `var := rhs`; an empty `var` is the identity update produced by `skip`.
struct Update {
  std::string var;
  LinearExpr rhs;

  bool is_identity() const { return var.empty(); }
};

/// One arc of the control flow graph. Which payload field is meaningful depends on
/// the kind of the source label.
struct Transition {
  Label src = 0;
  Label dst = 0;
  Update update;          // Assign
  PolyUnion guard;        // Branch: the predicate enabling this arc
  bool then_edge = true;  // Branch/Prob/Nondet: first (then) or second (else) arc
  Rational prob;          // Prob: probability of taking this arc

  std::string describe() const;
};

struct CFG {
  std::vector<std::string> pvars;
  std::vector<std::string> rvars;
  DistMap dists;
  std::map<Label, LabelKind> kinds;
  std::vector<Transition> transitions;  // sorted by source label, then arc before else arc
  Label l_in = 0;
  Label l_out = 0;

  std::vector<Label> labels() const;
  LabelKind kind(Label l) const;
  /// Indices into `transitions` of the arcs leaving `l`.
  std::vector<std::size_t> outgoing(Label l) const;
  bool contains(Label l) const { return kinds.count(l) != 0; }
};

struct LoopNode {
  Label head = 0;
  PolyUnion guard;
  std::set<Label> body;  // labels strictly inside the loop body (nested loops included)
  Label exit = 0;        // target of the loop's exit arc
  std::vector<LoopNode> children;
};

CFG build_cfg(const ProgramAST& prog);

/// While-nesting forest in source order.
std::vector<LoopNode> loop_forest(const CFG& cfg, const ProgramAST& prog);

/// The loop restricted to its own labels: head becomes l_in, the exit target becomes l_out
/// (kept as a terminal label without outgoing arcs).
CFG loop_subcfg(const CFG& cfg, const LoopNode& node);

/// Graphviz rendering.
std::string to_dot(const CFG& cfg);

}  // namespace dsmv

namespace dsmv {

/// One joint value of the sampling variables read by an update, with its probability.
struct SamplePoint {
  std::map<std::string, Rational> values;
  Rational prob;
};

/// Joint support of the sampling variables occurring in `upd` (product of marginals).
/// A single point with probability one when the update reads none.
/// Throws UnboundedSupportError if a sampling variable has no finite distribution.
std::vector<SamplePoint> sample_points(const Update& upd, const std::vector<std::string>& rvars,
                                       const DistMap& dists);

}  // namespace dsmv
