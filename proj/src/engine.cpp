#include "dsmv/engine.hpp"

#include <sstream>

namespace dsmv {

int CertNode::rule() const {
  switch (kind) {
    case Kind::Atom: return 9;
    case Kind::Seq: return 10;
    case Kind::Branch: return 11;
    case Kind::Loop: return 8;
  }
  return 0;
}

std::string CertNode::render(const std::vector<std::string>& order, int indent) const {
  std::ostringstream out;
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (kind) {
    case Kind::Atom: out << pad << "atom " << label << " [rule 9]\n"; break;
    case Kind::Seq: out << pad << "seq [rule 10]\n"; break;
    case Kind::Branch: {
      const char* k = branch == BranchKind::Guard ? "guard" : branch == BranchKind::Star ? "star" : "prob";
      out << pad << "branch " << label << " " << k << " [rule 11]\n";
      break;
    }
    case Kind::Loop: {
      out << pad << "loop " << label << " [rule 8]\n";
      std::istringstream lines(dsm.render(order));
      for (std::string line; std::getline(lines, line);) out << pad << "  | " << line << "\n";
      break;
    }
  }
  for (const auto& child : children) out << child.render(order, indent + 1);
  return out.str();
}

namespace {

class Prover {
 public:
  Prover(const ProgramAST& prog, const Invariant& inv)
      : inv_(inv), cfg_(build_cfg(prog)), forest_(loop_forest(cfg_, prog)) {
    for (const auto& node : forest_) index(node);
  }

  std::optional<CertNode> prove(const Stmt& stmt) {
    if (const auto* seq = stmt.as<SeqStmt>()) return prove_seq(seq->items, 0);
    CertNode node;
    node.label = stmt.label;
    if (stmt.as<SkipStmt>() || stmt.as<AssignStmt>()) {
      node.kind = CertNode::Kind::Atom;
      return node;
    }
    if (const auto* br = stmt.as<IfStmt>()) {
      node.kind = CertNode::Kind::Branch;
      node.branch = br->kind;
      auto then_cert = prove(*br->then_branch);
      if (!then_cert) return std::nullopt;
      auto else_cert = prove(*br->else_branch);
      if (!else_cert) return std::nullopt;
      node.children = {std::move(*then_cert), std::move(*else_cert)};
      return node;
    }
    const auto* w = stmt.as<WhileStmt>();
    node.kind = CertNode::Kind::Loop;
    auto body = prove(*w->body);
    if (!body) return std::nullopt;
    node.children.push_back(std::move(*body));
    CFG sub = loop_subcfg(cfg_, *loops_.at(stmt.label));
    Invariant local = restrict_to(inv_, sub);
    result.visited_loops.push_back(stmt.label);
    SynthesisOutcome outcome = synthesize_dsm(sub, local);
    if (!outcome.success()) {
      result.failing_loop = stmt.label;
      result.reason = to_string(outcome.reason) + ": " + outcome.message;
      return std::nullopt;
    }
    node.dsm = outcome.map;
    node.invariant = std::move(local);
    return node;
  }

  ProofResult result;

 private:
  void index(const LoopNode& node) {
    loops_[node.head] = &node;
    for (const auto& child : node.children) index(child);
  }

  // Right-nested binary sequencing: items[i] ; (items[i+1] ; ...)
  std::optional<CertNode> prove_seq(const std::vector<StmtPtr>& items, std::size_t i) {
    auto first = prove(*items[i]);
    if (!first || i + 1 == items.size()) return first;
    auto rest = prove_seq(items, i + 1);
    if (!rest) return std::nullopt;
    CertNode node;
    node.kind = CertNode::Kind::Seq;
    node.children = {std::move(*first), std::move(*rest)};
    return node;
  }

  const Invariant& inv_;
  CFG cfg_;
  std::vector<LoopNode> forest_;
  std::map<Label, const LoopNode*> loops_;
};

}  // namespace

ProofResult prove_termination(const ProgramAST& prog, const Invariant& inv) {
  Prover prover(prog, inv);
  auto cert = prover.prove(*prog.root);
  ProofResult result = std::move(prover.result);
  if (cert) {
    result.proved = true;
    result.certificate = std::move(*cert);
  }
  return result;
}

}  // namespace dsmv
