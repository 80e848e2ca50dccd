#include "dsmv/frontend.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dsmv/errors.hpp"
#include "parser.hpp"

namespace dsmv {

using detail::Tok;
using detail::TokenStream;

DiscreteDist::DiscreteDist(std::vector<Entry> support) : support_(std::move(support)) {
  if (support_.empty()) throw SemanticError("distribution has empty support");
  std::set<std::int64_t> seen;
  Rational total = 0;
  for (const auto& [value, p] : support_) {
    if (!seen.insert(value).second) {
      throw SemanticError("duplicate support value " + std::to_string(value));
    }
    if (p <= 0) throw SemanticError("support probabilities must be positive, got " + dsmv::to_string(p));
    total += p;
  }
  if (total != 1) throw SemanticError("probabilities sum to " + dsmv::to_string(total) + ", not 1");
}

Rational DiscreteDist::expectation() const {
  Rational sum = 0;
  for (const auto& [value, p] : support_) sum += p * value;
  return sum;
}

std::int64_t DiscreteDist::min_value() const {
  return std::min_element(support_.begin(), support_.end())->first;
}

std::int64_t DiscreteDist::max_value() const {
  return std::max_element(support_.begin(), support_.end())->first;
}

std::string DiscreteDist::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(support_[i].first) + ": " + dsmv::to_string(support_[i].second);
  }
  return out + "}";
}

namespace {

bool block_end(const TokenStream& ts) {
  return ts.at(Tok::End) || ts.at_keyword("od") || ts.at_keyword("fi") || ts.at_keyword("else");
}

class ProgramParser {
 public:
  ProgramParser(TokenStream& ts, ProgramAST& prog) : ts_(ts), prog_(prog) {}

  void parse_declarations() {
    while (ts_.at_keyword("dist")) {
      const auto& kw = ts_.next();
      const auto& name = ts_.expect(Tok::Ident, "distribution variable name");
      if (detail::is_keyword(name.text)) ts_.fail_at(name, "keyword used as variable name");
      ts_.expect(Tok::Eq, "'='");
      ts_.expect(Tok::LBrace, "'{'");
      std::vector<DiscreteDist::Entry> entries;
      if (!ts_.at(Tok::RBrace)) {
        do {
          Rational value = ts_.parse_number();
          if (!is_integer(value)) ts_.fail("support values must be integers");
          ts_.expect(Tok::Colon, "':'");
          Rational p = ts_.parse_number();
          entries.emplace_back(to_int64(value), p);
        } while (ts_.accept(Tok::Comma));
      }
      ts_.expect(Tok::RBrace, "'}'");
      ts_.accept(Tok::Semi);
      if (prog_.dists.count(name.text)) {
        throw SemanticError(std::to_string(kw.line) + ":" + std::to_string(kw.column) +
                            ": distribution for '" + name.text + "' declared twice");
      }
      try {
        prog_.dists.emplace(name.text, DiscreteDist(std::move(entries)));
      } catch (const SemanticError& e) {
        throw SemanticError(std::to_string(name.line) + ":" + std::to_string(name.column) + ": " + name.text +
                            ": " + e.what());
      }
      prog_.rvars.push_back(name.text);
    }
  }

  StmtPtr parse_sequence() {
    std::vector<StmtPtr> items;
    items.push_back(parse_statement());
    while (ts_.accept(Tok::Semi)) {
      if (block_end(ts_)) break;
      items.push_back(parse_statement());
    }
    if (items.size() == 1) return items.front();
    std::vector<StmtPtr> flat;
    for (auto& item : items) {
      if (const auto* seq = item->as<SeqStmt>()) {
        flat.insert(flat.end(), seq->items.begin(), seq->items.end());
      } else {
        flat.push_back(std::move(item));
      }
    }
    auto stmt = std::make_shared<Stmt>();
    stmt->node = SeqStmt{std::move(flat)};
    return stmt;
  }

 private:
  Label fresh_label(const std::shared_ptr<Stmt>& stmt) {
    stmt->label = next_label_++;
    prog_.labels[stmt->label] = stmt.get();
    return stmt->label;
  }

  void note_pvar(const std::string& name, const detail::Token& where) {
    if (prog_.dists.count(name)) {
      throw SemanticError(std::to_string(where.line) + ":" + std::to_string(where.column) + ": '" + name +
                          "' is a sampling variable and cannot be used here");
    }
    if (std::find(prog_.pvars.begin(), prog_.pvars.end(), name) == prog_.pvars.end()) {
      prog_.pvars.push_back(name);
    }
  }

  void note_expr(const LinearExpr& e, const detail::Token& where, bool allow_rvars) {
    for (const auto& [name, coeff] : e.terms()) {
      if (prog_.dists.count(name)) {
        if (!allow_rvars) note_pvar(name, where);  // throws
        continue;
      }
      note_pvar(name, where);
    }
  }

  void note_bexpr(const BoolExpr& e, const detail::Token& where) {
    if (e.kind == BoolExpr::Kind::Atom) {
      note_expr(e.lhs, where, false);
      note_expr(e.rhs, where, false);
    }
    for (const auto& arg : e.args) note_bexpr(*arg, where);
  }

  Guard parse_guard() {
    const auto& where = ts_.peek();
    Guard g;
    g.expr = ts_.parse_bexpr();
    note_bexpr(*g.expr, where);
    g.dnf = to_dnf(*g.expr);
    return g;
  }

  StmtPtr parse_statement() {
    auto stmt = std::make_shared<Stmt>();
    const auto& start = ts_.peek();
    if (ts_.accept_keyword("skip")) {
      fresh_label(stmt);
      stmt->node = SkipStmt{};
      return stmt;
    }
    if (ts_.accept_keyword("while")) {
      fresh_label(stmt);
      WhileStmt w;
      w.guard = parse_guard();
      ts_.expect_keyword("do");
      w.body = parse_sequence();
      ts_.expect_keyword("od");
      stmt->node = std::move(w);
      return stmt;
    }
    if (ts_.accept_keyword("if")) {
      fresh_label(stmt);
      IfStmt branch;
      if (ts_.accept(Tok::Star) || ts_.accept_keyword("star")) {
        branch.kind = BranchKind::Star;
      } else if (ts_.accept_keyword("prob")) {
        branch.kind = BranchKind::Prob;
        ts_.expect(Tok::LParen, "'('");
        const auto& where = ts_.peek();
        branch.prob = ts_.parse_number();
        if (branch.prob < 0 || branch.prob > 1) {
          throw SemanticError(std::to_string(where.line) + ":" + std::to_string(where.column) +
                              ": branch probability " + dsmv::to_string(branch.prob) + " is outside [0, 1]");
        }
        ts_.expect(Tok::RParen, "')'");
      } else {
        branch.kind = BranchKind::Guard;
        branch.guard = parse_guard();
      }
      ts_.expect_keyword("then");
      branch.then_branch = parse_sequence();
      ts_.expect_keyword("else");
      branch.else_branch = parse_sequence();
      ts_.expect_keyword("fi");
      stmt->node = std::move(branch);
      return stmt;
    }
    if (ts_.at(Tok::Ident) && !detail::is_keyword(start.text)) {
      const auto& target = ts_.next();
      ts_.expect(Tok::Assign, "':='");
      note_pvar(target.text, target);
      fresh_label(stmt);
      const auto& where = ts_.peek();
      AssignStmt assign{target.text, ts_.parse_expr()};
      note_expr(assign.rhs, where, true);
      stmt->node = std::move(assign);
      return stmt;
    }
    ts_.fail("expected statement");
  }

  TokenStream& ts_;
  ProgramAST& prog_;
  Label next_label_ = 1;

 public:
  Label next_label() const { return next_label_; }
};

ProgramAST parse_with(std::string_view text, const DistMap* dists) {
  TokenStream ts(detail::tokenize(text));
  ProgramAST prog;
  ProgramParser parser(ts, prog);
  if (dists) {
    prog.dists = *dists;
    for (const auto& [name, d] : *dists) prog.rvars.push_back(name);
  } else {
    parser.parse_declarations();
  }
  prog.root = parser.parse_sequence();
  if (!ts.at(Tok::End)) ts.fail("unexpected trailing input");
  prog.terminal = parser.next_label();
  return prog;
}

void print(const Stmt& stmt, const std::vector<std::string>& order, int indent, std::ostringstream& out) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (stmt.as<SkipStmt>()) {
    out << pad << "skip";
  } else if (const auto* a = stmt.as<AssignStmt>()) {
    out << pad << a->var << " := " << a->rhs.to_string(order);
  } else if (const auto* seq = stmt.as<SeqStmt>()) {
    for (std::size_t i = 0; i < seq->items.size(); ++i) {
      if (i) out << ";\n";
      print(*seq->items[i], order, indent, out);
    }
  } else if (const auto* br = stmt.as<IfStmt>()) {
    out << pad << "if ";
    switch (br->kind) {
      case BranchKind::Guard: out << br->guard.expr->to_string(order); break;
      case BranchKind::Star: out << "*"; break;
      case BranchKind::Prob: out << "prob(" << dsmv::to_string(br->prob) << ")"; break;
    }
    out << " then\n";
    print(*br->then_branch, order, indent + 1, out);
    out << "\n" << pad << "else\n";
    print(*br->else_branch, order, indent + 1, out);
    out << "\n" << pad << "fi";
  } else if (const auto* w = stmt.as<WhileStmt>()) {
    out << pad << "while " << w->guard.expr->to_string(order) << " do\n";
    print(*w->body, order, indent + 1, out);
    out << "\n" << pad << "od";
  }
}

}  // namespace

ProgramAST parse_program(std::string_view text) { return parse_with(text, nullptr); }

ProgramAST parse_fragment(std::string_view text, const DistMap& dists) { return parse_with(text, &dists); }

PolyUnion parse_linear_predicate(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  BoolExprPtr e = ts.parse_bexpr();
  if (!ts.at(Tok::End)) ts.fail("unexpected trailing input in predicate");
  return to_dnf(*e);
}

LinearExpr parse_linear_expr(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  LinearExpr e = ts.parse_expr();
  if (!ts.at(Tok::End)) ts.fail("unexpected trailing input in expression");
  return e;
}

std::string to_source(const Stmt& stmt, const std::vector<std::string>& order) {
  std::ostringstream out;
  print(stmt, order, 0, out);
  return out.str();
}

std::string to_source(const ProgramAST& prog) {
  std::ostringstream out;
  for (const auto& name : prog.rvars) {
    out << "dist " << name << " = " << prog.dists.at(name).to_string() << ";\n";
  }
  std::vector<std::string> order = prog.pvars;
  order.insert(order.end(), prog.rvars.begin(), prog.rvars.end());
  out << to_source(*prog.root, order) << "\n";
  return out.str();
}

bool same_structure(const Stmt& lhs, const Stmt& rhs) {
  if (lhs.node.index() != rhs.node.index()) return false;
  if (lhs.as<SkipStmt>()) return true;
  if (const auto* a = lhs.as<AssignStmt>()) {
    const auto* b = rhs.as<AssignStmt>();
    return a->var == b->var && a->rhs == b->rhs;
  }
  if (const auto* a = lhs.as<SeqStmt>()) {
    const auto* b = rhs.as<SeqStmt>();
    if (a->items.size() != b->items.size()) return false;
    for (std::size_t i = 0; i < a->items.size(); ++i) {
      if (!same_structure(*a->items[i], *b->items[i])) return false;
    }
    return true;
  }
  if (const auto* a = lhs.as<IfStmt>()) {
    const auto* b = rhs.as<IfStmt>();
    if (a->kind != b->kind) return false;
    if (a->kind == BranchKind::Guard && a->guard.dnf != b->guard.dnf) return false;
    if (a->kind == BranchKind::Prob && a->prob != b->prob) return false;
    return same_structure(*a->then_branch, *b->then_branch) && same_structure(*a->else_branch, *b->else_branch);
  }
  const auto* a = lhs.as<WhileStmt>();
  const auto* b = rhs.as<WhileStmt>();
  return a->guard.dnf == b->guard.dnf && same_structure(*a->body, *b->body);
}

std::vector<StmtPtr> flatten(const StmtPtr& stmt) {
  if (const auto* seq = stmt->as<SeqStmt>()) return seq->items;
  return {stmt};
}

}  // namespace dsmv
