#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dsmv/dsm.hpp"
#include "dsmv/frontend.hpp"

namespace dsmv {

/// Angle triples <R> P <R'> bound the differences only; curly triples {R} P {R'} also
/// require the lower bound c at loop heads; Tm(P) states termination of P.
enum class TripleKind { Angle, Curly, Tm };

struct DerivationStep {
  std::string id;
  int line = 0;
  int rule = 0;
  std::vector<std::string> premises;
  TripleKind kind = TripleKind::Angle;
  LinearExpr pre;   // Angle/Curly only
  LinearExpr post;  // Angle/Curly only
  ProgramAST prog;
  Rational epsilon{1};
  Rational a{0};
  Rational b{0};
  Rational c{0};
};

struct Derivation {
  DistMap dists;
  std::vector<DerivationStep> steps;

  /// Position of a step by id; throws MalformedDerivationError if absent.
  std::size_t index_of(const std::string& id) const;
};

/// Parses a `.drv` file: optional `dist` declarations and default parameter lines
/// (`eps`, `a`, `b`, `c`), then blocks `step <id> ... end` with the keys `rule`,
/// `premises`, `triple angle|curly|tm`, `pre`, `prog`, `post` and per-step parameter
/// overrides. A `prog` value continues on following lines until the next key.
/// Throws MalformedDerivationError for duplicate ids, missing fields and premises that
/// do not name an earlier step.
Derivation parse_derivation(std::string_view text);

struct DerivationVerdict {
  bool valid = false;
  std::size_t index = 0;  // failing step (Invalid only)
  std::string step;
  int rule = 0;
  std::string reason;
  // Effective parameters: min epsilon, min a, max b, min c over all triple steps.
  Rational epsilon{0};
  Rational a{0};
  Rational b{0};
  Rational c{0};

  std::string to_string() const;
};

/// Checks every step in order and reports the first one whose rule does not apply.
DerivationVerdict check_derivation(const Derivation& drv);

/// Reads a DSM-map off a valid derivation whose step `root` concludes a curly triple for a
/// while loop: each label gets the pre-expression of the triple whose fragment starts there
/// and the loop's terminal label gets the final post-expression. Labels are those of the
/// root step's program. Throws std::logic_error if the step is not such a conclusion.
DSMMap compile_derivation(const Derivation& drv, const std::string& root);

}  // namespace dsmv
