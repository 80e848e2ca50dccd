#include "dsmv/derivation.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "dsmv/errors.hpp"
#include "dsmv/farkas.hpp"

namespace dsmv {

namespace {

const std::set<std::string> kKeys = {"step", "rule", "premises", "triple", "pre", "prog", "post",
                                     "eps", "epsilon", "a", "b", "c", "end", "dist"};

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string strip_comment(const std::string& line) {
  auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

// Splits the file into key/value entries; lines that do not start with a key extend the
// previous entry (multi-line program fragments).
std::vector<Entry> entries_of(std::string_view text) {
  std::vector<Entry> out;
  std::istringstream in{std::string(text)};
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    auto space = line.find_first_of(" \t");
    std::string key = line.substr(0, space);
    std::string rest = space == std::string::npos ? "" : trim(line.substr(space));
    if (!rest.empty() && rest.front() == '=' && key != "dist") rest = trim(rest.substr(1));
    if (kKeys.count(key)) {
      out.push_back({key, rest, lineno});
    } else if (!out.empty() && out.back().key == "prog") {
      out.back().value += "\n" + line;
    } else {
      throw MalformedDerivationError("line " + std::to_string(lineno) + ": unexpected '" + key + "'");
    }
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cleaned = s;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

Rational number(const Entry& e) {
  try {
    return parse_rational(e.value);
  } catch (const std::invalid_argument&) {
    throw MalformedDerivationError("line " + std::to_string(e.line) + ": '" + e.value + "' is not a number");
  }
}

}  // namespace

std::size_t Derivation::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].id == id) return i;
  }
  throw MalformedDerivationError("no step named '" + id + "'");
}

Derivation parse_derivation(std::string_view text) {
  Derivation drv;
  Rational d_eps{1}, d_a{0}, d_b{0}, d_c{0};
  std::string dist_text;
  std::optional<DerivationStep> cur;
  std::string prog_text, pre_text, post_text;
  bool have_triple = false;
  std::set<std::string> ids;

  auto fail = [](int line, const std::string& msg) -> void {
    throw MalformedDerivationError("line " + std::to_string(line) + ": " + msg);
  };

  auto finish = [&](int line) {
    DerivationStep& s = *cur;
    if (s.rule == 0) fail(line, "step " + s.id + " has no rule");
    if (!have_triple) fail(line, "step " + s.id + " has no 'triple' kind");
    if (prog_text.empty()) fail(line, "step " + s.id + " has no program");
    s.prog = parse_fragment(prog_text, drv.dists);
    if (s.kind != TripleKind::Tm) {
      if (pre_text.empty() || post_text.empty()) fail(line, "step " + s.id + " needs both 'pre' and 'post'");
      s.pre = parse_linear_expr(pre_text);
      s.post = parse_linear_expr(post_text);
    } else if (!pre_text.empty() || !post_text.empty()) {
      fail(line, "step " + s.id + ": a Tm statement has no pre- or post-expression");
    }
    drv.steps.push_back(std::move(s));
    cur.reset();
  };

  for (const auto& e : entries_of(text)) {
    if (!cur) {
      if (e.key == "dist") {
        if (!drv.steps.empty()) fail(e.line, "distributions must be declared before the first step");
        dist_text += "dist " + e.value + "\n";
        drv.dists = parse_program(dist_text + "skip").dists;
      } else if (e.key == "eps" || e.key == "epsilon") {
        d_eps = number(e);
      } else if (e.key == "a") {
        d_a = number(e);
      } else if (e.key == "b") {
        d_b = number(e);
      } else if (e.key == "c") {
        d_c = number(e);
      } else if (e.key == "step") {
        if (e.value.empty() || words(e.value).size() != 1) fail(e.line, "expected 'step <id>'");
        if (!ids.insert(e.value).second) fail(e.line, "duplicate step id '" + e.value + "'");
        cur.emplace();
        cur->id = e.value;
        cur->line = e.line;
        cur->epsilon = d_eps;
        cur->a = d_a;
        cur->b = d_b;
        cur->c = d_c;
        prog_text.clear();
        pre_text.clear();
        post_text.clear();
        have_triple = false;
      } else {
        fail(e.line, "'" + e.key + "' outside of a step");
      }
      continue;
    }
    DerivationStep& s = *cur;
    if (e.key == "end") {
      finish(e.line);
    } else if (e.key == "rule") {
      Rational r = number(e);
      if (!is_integer(r) || r < 1 || r > 11) fail(e.line, "rule must be an integer between 1 and 11");
      s.rule = static_cast<int>(to_int64(r));
    } else if (e.key == "premises") {
      for (const auto& p : words(e.value)) {
        if (!ids.count(p) || p == s.id) fail(e.line, "premise '" + p + "' does not name an earlier step");
        s.premises.push_back(p);
      }
    } else if (e.key == "triple") {
      have_triple = true;
      if (e.value == "angle") s.kind = TripleKind::Angle;
      else if (e.value == "curly") s.kind = TripleKind::Curly;
      else if (e.value == "tm") s.kind = TripleKind::Tm;
      else fail(e.line, "triple kind must be angle, curly or tm");
    } else if (e.key == "pre") {
      pre_text = e.value;
    } else if (e.key == "post") {
      post_text = e.value;
    } else if (e.key == "prog") {
      prog_text = e.value;
    } else if (e.key == "eps" || e.key == "epsilon") {
      s.epsilon = number(e);
    } else if (e.key == "a") {
      s.a = number(e);
    } else if (e.key == "b") {
      s.b = number(e);
    } else if (e.key == "c") {
      s.c = number(e);
    } else {
      fail(e.line, "'" + e.key + "' inside a step");
    }
  }
  if (cur) throw MalformedDerivationError("step " + cur->id + " is not closed by 'end'");
  return drv;
}

std::string DerivationVerdict::to_string() const {
  if (valid) {
    return "Valid (eps " + dsmv::to_string(epsilon) + ", a " + dsmv::to_string(a) + ", b " + dsmv::to_string(b) +
           ", c " + dsmv::to_string(c) + ")";
  }
  return "Invalid at step " + step + " (rule " + std::to_string(rule) + "): " + reason;
}

namespace {

/// Raised inside the checker when a step's side condition or shape is wrong.
struct StepFailure {
  std::string reason;
};

[[noreturn]] void reject(const std::string& reason) { throw StepFailure{reason}; }

std::string show(const LinearExpr& e) { return e.to_string(); }

std::string show_point(const std::map<std::string, Rational>& point) {
  std::string out;
  for (const auto& [v, val] : point) out += (out.empty() ? "" : ", ") + v + " = " + to_string(val);
  return "{" + out + "}";
}

// lo <= form <= hi at every valuation: only a constant form can satisfy this.
void bounded_everywhere(const LinearExpr& form, const std::optional<Rational>& lo, const std::optional<Rational>& hi,
                        const std::string& what) {
  if (!form.is_constant()) reject(what + " is " + show(form) + ", which is unbounded over all valuations");
  const Rational& v = form.constant();
  if (lo && v < *lo) reject(what + " = " + to_string(v) + " is below " + to_string(*lo));
  if (hi && v > *hi) reject(what + " = " + to_string(v) + " exceeds " + to_string(*hi));
}

// lo <= form <= hi at every valuation satisfying the predicate.
void bounded_on(const PolyUnion& pred, const LinearExpr& form, const std::optional<Rational>& lo,
                const std::optional<Rational>& hi, const std::string& what) {
  for (const auto& disjunct : pred.disjuncts()) {
    try {
      if (hi) {
        auto r = polyhedron_includes(disjunct, form - LinearExpr(*hi));
        if (!r.holds) {
          reject(what + " <= " + to_string(*hi) + " fails on " + disjunct.to_string() + " at " + show_point(r.witness));
        }
      }
      if (lo) {
        auto r = polyhedron_includes(disjunct, LinearExpr(*lo) - form);
        if (!r.holds) {
          reject(what + " >= " + to_string(*lo) + " fails on " + disjunct.to_string() + " at " + show_point(r.witness));
        }
      }
    } catch (const EmptyPolyhedronError&) {
      // an unsatisfiable disjunct imposes nothing
    }
  }
}

std::vector<StmtPtr> items_of(const ProgramAST& prog) { return flatten(prog.root); }

bool same_items(const std::vector<StmtPtr>& lhs, std::size_t from, std::size_t to, const std::vector<StmtPtr>& rhs) {
  if (to - from != rhs.size()) return false;
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    if (!same_structure(*lhs[from + i], *rhs[i])) return false;
  }
  return true;
}

bool same_program(const StmtPtr& stmt, const ProgramAST& prog) {
  auto lhs = flatten(stmt);
  return same_items(lhs, 0, lhs.size(), items_of(prog));
}

const Stmt& single(const DerivationStep& s) {
  auto items = items_of(s.prog);
  if (items.size() != 1) reject("the program is a sequence, not a single statement");
  return *items.front();
}

class Checker {
 public:
  explicit Checker(const Derivation& drv) : drv_(drv) {}

  void check(const DerivationStep& s) {
    bool tm_rule = s.rule >= 8;
    if (tm_rule && s.kind != TripleKind::Tm) reject("rule " + std::to_string(s.rule) + " concludes a Tm statement");
    if (!tm_rule && s.kind == TripleKind::Tm) reject("rule " + std::to_string(s.rule) + " concludes a triple");
    if (!tm_rule && s.epsilon <= 0) reject("epsilon must be positive");
    if (!tm_rule && s.a > s.b) reject("a exceeds b");
    switch (s.rule) {
      case 1: return while_rule(s);
      case 2: return skip_rule(s);
      case 3: return assign_rule(s);
      case 4: return seq_rule(s);
      case 5:
      case 6: return branch_rule(s);
      case 7: return prob_rule(s);
      case 8: return tm_while(s);
      case 9: return tm_atom(s);
      case 10: return tm_seq(s);
      case 11: return tm_branch(s);
    }
    reject("unknown rule");
  }

 private:
  const DerivationStep& premise(const DerivationStep& s, std::size_t i) const {
    return drv_.steps[drv_.index_of(s.premises[i])];
  }

  void arity(const DerivationStep& s, std::size_t n) const {
    if (s.premises.size() != n) {
      reject("expects " + std::to_string(n) + " premise(s), got " + std::to_string(s.premises.size()));
    }
  }

  // A curly conclusion needs curly premises; an angle conclusion accepts either.
  void triple_premise(const DerivationStep& s, const DerivationStep& p) const {
    if (p.kind == TripleKind::Tm) reject("premise " + p.id + " is a Tm statement, not a triple");
    if (s.kind == TripleKind::Curly && p.kind != TripleKind::Curly) {
      reject("premise " + p.id + " is an angle triple but the conclusion is curly");
    }
  }

  static Rational hi(const DerivationStep& s) { return std::min(Rational(-s.epsilon), s.b); }

  void while_rule(const DerivationStep& s) const {
    const auto* w = single(s).as<WhileStmt>();
    if (!w) reject("the program is not a while loop");
    arity(s, 1);
    const auto& p = premise(s, 0);
    if (p.kind == TripleKind::Tm) reject("premise " + p.id + " is a Tm statement, not a triple");
    if (!same_program(w->body, p.prog)) reject("premise " + p.id + " is not about the loop body");
    if (!(p.post == s.pre)) {
      reject("premise post-expression " + show(p.post) + " differs from the loop invariant expression " + show(s.pre));
    }
    const PolyUnion& g = w->guard.dnf;
    PolyUnion not_g = g.complement_integer();
    if (s.kind == TripleKind::Curly) bounded_on(g, s.pre, s.c, std::nullopt, "G -> pre");
    bounded_on(g, p.pre - s.pre, s.a, hi(s), "G -> body entry - pre");
    bounded_on(not_g, s.post - s.pre, s.a, hi(s), "not G -> post - pre");
  }

  void skip_rule(const DerivationStep& s) const {
    if (!single(s).as<SkipStmt>()) reject("the program is not skip");
    arity(s, 0);
    bounded_everywhere(s.post - s.pre, s.a, hi(s), "post - pre");
  }

  void assign_rule(const DerivationStep& s) const {
    const auto* asg = single(s).as<AssignStmt>();
    if (!asg) reject("the program is not an assignment");
    arity(s, 0);
    Update upd{asg->var, asg->rhs};
    const auto& rvars = s.prog.rvars;
    LinearExpr expected = expected_post(s.post, upd, rvars, s.prog.dists) - s.pre;
    bounded_everywhere(expected, s.a, hi(s), "E[post[x<-e]] - pre");
    DiffRange range = extreme_post_diffs(s.pre, s.post, upd, rvars, s.prog.dists);
    if (!range.min || *range.min < s.a) {
      reject("post[x<-e] - pre falls below a = " + to_string(s.a) + " for some sample");
    }
    if (!range.max || *range.max > s.b) {
      reject("post[x<-e] - pre exceeds b = " + to_string(s.b) + " for some sample");
    }
  }

  void seq_rule(const DerivationStep& s) const {
    arity(s, 2);
    const auto& p1 = premise(s, 0);
    const auto& p2 = premise(s, 1);
    triple_premise(s, p1);
    triple_premise(s, p2);
    auto items = items_of(s.prog);
    auto first = items_of(p1.prog);
    auto second = items_of(p2.prog);
    if (first.size() + second.size() != items.size() || !same_items(items, 0, first.size(), first) ||
        !same_items(items, first.size(), items.size(), second)) {
      reject("the program is not the sequence of the premises' programs");
    }
    if (!(p1.pre == s.pre)) reject("first premise starts at " + show(p1.pre) + ", not " + show(s.pre));
    if (!(p1.post == p2.pre)) reject("premises meet at " + show(p1.post) + " and " + show(p2.pre));
    if (!(p2.post == s.post)) reject("second premise ends at " + show(p2.post) + ", not " + show(s.post));
  }

  // Shared by the guarded (5), nondeterministic (6) and probabilistic (7) branch rules.
  std::pair<const DerivationStep*, const DerivationStep*> branch_premises(const DerivationStep& s,
                                                                          const IfStmt& br) const {
    arity(s, 2);
    const auto& p1 = premise(s, 0);
    const auto& p2 = premise(s, 1);
    triple_premise(s, p1);
    triple_premise(s, p2);
    if (!same_program(br.then_branch, p1.prog)) reject("premise " + p1.id + " is not about the then-branch");
    if (!same_program(br.else_branch, p2.prog)) reject("premise " + p2.id + " is not about the else-branch");
    if (!(p1.post == s.post) || !(p2.post == s.post)) reject("branch post-expressions differ from the conclusion's");
    return {&p1, &p2};
  }

  void branch_rule(const DerivationStep& s) const {
    const auto* br = single(s).as<IfStmt>();
    BranchKind want = s.rule == 5 ? BranchKind::Guard : BranchKind::Star;
    if (!br || br->kind != want) {
      reject(s.rule == 5 ? "the program is not a guarded conditional" : "the program is not a nondeterministic choice");
    }
    auto [p1, p2] = branch_premises(s, *br);
    if (s.rule == 5) {
      bounded_on(br->guard.dnf, p1->pre - s.pre, s.a, hi(s), "G -> then entry - pre");
      bounded_on(br->guard.dnf.complement_integer(), p2->pre - s.pre, s.a, hi(s), "not G -> else entry - pre");
    } else {
      bounded_everywhere(p1->pre - s.pre, s.a, hi(s), "then entry - pre");
      bounded_everywhere(p2->pre - s.pre, s.a, hi(s), "else entry - pre");
    }
  }

  void prob_rule(const DerivationStep& s) const {
    const auto* br = single(s).as<IfStmt>();
    if (!br || br->kind != BranchKind::Prob) reject("the program is not a probabilistic choice");
    auto [p1, p2] = branch_premises(s, *br);
    bounded_everywhere(p1->pre - s.pre, s.a, s.b, "then entry - pre");
    bounded_everywhere(p2->pre - s.pre, s.a, s.b, "else entry - pre");
    LinearExpr mix = p1->pre * br->prob + p2->pre * (Rational(1) - br->prob) - s.pre;
    bounded_everywhere(mix, std::nullopt, Rational(-s.epsilon), "p * then entry + (1 - p) * else entry - pre");
  }

  void tm_while(const DerivationStep& s) const {
    const auto* w = single(s).as<WhileStmt>();
    if (!w) reject("the program is not a while loop");
    arity(s, 2);
    const DerivationStep* body = nullptr;
    const DerivationStep* triple = nullptr;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& p = premise(s, i);
      (p.kind == TripleKind::Tm ? body : triple) = &p;
    }
    if (!body || !triple) reject("needs one Tm premise and one curly triple premise");
    if (triple->kind != TripleKind::Curly) reject("premise " + triple->id + " is not a curly triple");
    if (!same_program(w->body, body->prog)) reject("premise " + body->id + " is not about the loop body");
    if (!same_items(items_of(s.prog), 0, 1, items_of(triple->prog))) {
      reject("premise " + triple->id + " is not about this loop");
    }
  }

  void tm_atom(const DerivationStep& s) const {
    const Stmt& st = single(s);
    if (!st.as<SkipStmt>() && !st.as<AssignStmt>()) reject("the program is not an assignment or skip");
    arity(s, 0);
  }

  void tm_seq(const DerivationStep& s) const {
    arity(s, 2);
    const auto& p1 = premise(s, 0);
    const auto& p2 = premise(s, 1);
    if (p1.kind != TripleKind::Tm || p2.kind != TripleKind::Tm) reject("premises must be Tm statements");
    auto items = items_of(s.prog);
    auto first = items_of(p1.prog);
    auto second = items_of(p2.prog);
    if (first.size() + second.size() != items.size() || !same_items(items, 0, first.size(), first) ||
        !same_items(items, first.size(), items.size(), second)) {
      reject("the program is not the sequence of the premises' programs");
    }
  }

  void tm_branch(const DerivationStep& s) const {
    const auto* br = single(s).as<IfStmt>();
    if (!br) reject("the program is not a branch");
    arity(s, 2);
    const auto& p1 = premise(s, 0);
    const auto& p2 = premise(s, 1);
    if (p1.kind != TripleKind::Tm || p2.kind != TripleKind::Tm) reject("premises must be Tm statements");
    if (!same_program(br->then_branch, p1.prog)) reject("premise " + p1.id + " is not about the then-branch");
    if (!same_program(br->else_branch, p2.prog)) reject("premise " + p2.id + " is not about the else-branch");
  }

  const Derivation& drv_;
};

}  // namespace

DerivationVerdict check_derivation(const Derivation& drv) {
  DerivationVerdict verdict;
  Checker checker(drv);
  bool first = true;
  for (std::size_t i = 0; i < drv.steps.size(); ++i) {
    const auto& s = drv.steps[i];
    for (const auto& p : s.premises) {
      if (drv.index_of(p) >= i) throw MalformedDerivationError("step " + s.id + " cites later step " + p);
    }
    try {
      checker.check(s);
    } catch (const StepFailure& f) {
      verdict.valid = false;
      verdict.index = i;
      verdict.step = s.id;
      verdict.rule = s.rule;
      verdict.reason = f.reason;
      return verdict;
    }
    if (s.kind == TripleKind::Tm) continue;
    if (first) {
      verdict.epsilon = s.epsilon;
      verdict.a = s.a;
      verdict.b = s.b;
      verdict.c = s.c;
      first = false;
    } else {
      verdict.epsilon = std::min(verdict.epsilon, s.epsilon);
      verdict.a = std::min(verdict.a, s.a);
      verdict.b = std::max(verdict.b, s.b);
      verdict.c = std::min(verdict.c, s.c);
    }
  }
  verdict.valid = true;
  return verdict;
}

namespace {

class Compiler {
 public:
  explicit Compiler(const Derivation& drv) : drv_(drv) {}

  void run(const DerivationStep& s, const std::vector<StmtPtr>& items, std::size_t from, std::size_t to, Label exit) {
    assign(items[from]->label, s.pre);
    assign(exit, s.post);
    const Stmt& head = *items[from];
    switch (s.rule) {
      case 1: {
        const auto& p = step(s.premises[0]);
        auto body = flatten(head.as<WhileStmt>()->body);
        run(p, body, 0, body.size(), head.label);
        break;
      }
      case 4: {
        const auto& p1 = step(s.premises[0]);
        const auto& p2 = step(s.premises[1]);
        std::size_t mid = from + flatten(p1.prog.root).size();
        run(p1, items, from, mid, items[mid]->label);
        run(p2, items, mid, to, exit);
        break;
      }
      case 5:
      case 6:
      case 7: {
        const auto* br = head.as<IfStmt>();
        auto then_items = flatten(br->then_branch);
        auto else_items = flatten(br->else_branch);
        run(step(s.premises[0]), then_items, 0, then_items.size(), exit);
        run(step(s.premises[1]), else_items, 0, else_items.size(), exit);
        break;
      }
      default:
        break;
    }
  }

  std::map<Label, LinearExpr> eta;

 private:
  const DerivationStep& step(const std::string& id) const { return drv_.steps[drv_.index_of(id)]; }

  void assign(Label l, const LinearExpr& e) {
    auto [it, inserted] = eta.emplace(l, e);
    if (!inserted && !(it->second == e)) {
      throw std::logic_error("derivation assigns both " + show(it->second) + " and " + show(e) + " to label " +
                             std::to_string(l));
    }
  }

  const Derivation& drv_;
};

}  // namespace

DSMMap compile_derivation(const Derivation& drv, const std::string& root) {
  const auto& s = drv.steps[drv.index_of(root)];
  auto items = flatten(s.prog.root);
  if (s.rule != 1 || s.kind != TripleKind::Curly || items.size() != 1 || !items[0]->as<WhileStmt>()) {
    throw std::logic_error("step " + root + " does not conclude a curly triple for a while loop");
  }
  DerivationVerdict verdict = check_derivation(drv);
  if (!verdict.valid) throw std::logic_error("cannot compile an invalid derivation: " + verdict.to_string());
  Compiler compiler(drv);
  compiler.run(s, items, 0, 1, s.prog.terminal);
  DSMMap map;
  map.eta = std::move(compiler.eta);
  map.epsilon = verdict.epsilon;
  map.a = verdict.a;
  map.b = verdict.b;
  map.c = verdict.c;
  return map;
}

}  // namespace dsmv
