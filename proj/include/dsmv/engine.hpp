#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dsmv/dsm.hpp"
#include "dsmv/synthesis.hpp"

namespace dsmv {

/// Proof tree mirroring the program structure: atoms (rule 9), binary sequencing
/// (rule 10), branching (rule 11) and loops (rule 8) carrying their checked DSM-map.
struct CertNode {
  enum class Kind { Atom, Seq, Branch, Loop };
  Kind kind = Kind::Atom;
  Label label = 0;                        // Atom, Branch, Loop
  BranchKind branch = BranchKind::Guard;  // Branch
  std::vector<CertNode> children;         // Seq: 2, Branch: 2, Loop: 1 (the body)
  DSMMap dsm;                             // Loop
  Invariant invariant;                    // Loop: the invariant restricted to the loop

  int rule() const;
  std::string render(const std::vector<std::string>& order = {}, int indent = 0) const;
};

struct ProofResult {
  bool proved = false;
  CertNode certificate;                // when proved
  Label failing_loop = 0;              // when not proved
  std::string reason;                  // when not proved
  std::vector<Label> visited_loops;    // in the order their side condition was decided
};

/// Post-order recursion over the program: bodies first, then the loop's own DSM-map.
ProofResult prove_termination(const ProgramAST& prog, const Invariant& inv);

}  // namespace dsmv
