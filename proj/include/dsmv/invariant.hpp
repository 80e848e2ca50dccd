#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dsmv/cfg.hpp"

namespace dsmv {

/// Per-label finite union of polyhedra over the program variables.
struct Invariant {
  std::map<Label, PolyUnion> at;

  /// I(l); labels without an entry denote the whole space.
  const PolyUnion& of(Label l) const;
  /// `inv <label>: <predicate>` lines in label order.
  std::string render(const std::vector<std::string>& order = {}) const;
};

/// Reads `inv <label>: <predicate>` lines (`#` comments, blank lines allowed).
/// Labels of `cfg` not mentioned map to true.
Invariant load_invariant(std::string_view text, const CFG& cfg);

/// Syntactic defaults from branch predicates: a label whose every incoming arc is a
/// conditional arc (and which is not the entry) receives the union of those predicates.
Invariant guard_default_invariant(const CFG& cfg);

/// The invariant restricted to the labels of `cfg`.
Invariant restrict_to(const Invariant& inv, const CFG& cfg);

struct InductivenessViolation {
  Label src = 0;
  Label dst = 0;
  std::size_t disjunct = 0;
  std::string detail;
};

/// Advisory lint: arcs whose post-image of I(src) is not shown to lie in I(dst).
std::vector<InductivenessViolation> check_inductive(const Invariant& inv, const CFG& cfg);

}  // namespace dsmv
