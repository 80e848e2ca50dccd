#include "dsmv/cfg.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "dsmv/errors.hpp"

namespace dsmv {

std::string to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::Assign: return "assign";
    case LabelKind::Branch: return "branch";
    case LabelKind::Prob: return "prob";
    case LabelKind::Nondet: return "nondet";
    case LabelKind::Terminal: return "terminal";
  }
  return "?";
}

std::string Transition::describe() const {
  return std::to_string(src) + "->" + std::to_string(dst);
}

std::vector<Label> CFG::labels() const {
  std::vector<Label> out;
  for (const auto& [l, k] : kinds) out.push_back(l);
  return out;
}

LabelKind CFG::kind(Label l) const {
  auto it = kinds.find(l);
  if (it == kinds.end()) throw UnknownLabelError("label " + std::to_string(l) + " is not in the CFG");
  return it->second;
}

std::vector<std::size_t> CFG::outgoing(Label l) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i].src == l) out.push_back(i);
  }
  return out;
}

namespace {

class Builder {
 public:
  explicit Builder(CFG& cfg) : cfg_(cfg) {}

  // Emits the arcs of `stmt` whose control continues at `next`; returns the entry label.
  Label build(const Stmt& stmt, Label next) {
    if (const auto* seq = stmt.as<SeqStmt>()) {
      for (auto it = seq->items.rbegin(); it != seq->items.rend(); ++it) next = build(**it, next);
      return next;
    }
    Label l = stmt.label;
    if (stmt.as<SkipStmt>()) {
      cfg_.kinds[l] = LabelKind::Assign;
      add({l, next, Update{}, {}, true, 0});
    } else if (const auto* a = stmt.as<AssignStmt>()) {
      cfg_.kinds[l] = LabelKind::Assign;
      add({l, next, Update{a->var, a->rhs}, {}, true, 0});
    } else if (const auto* br = stmt.as<IfStmt>()) {
      Label then_entry = build(*br->then_branch, next);
      Label else_entry = build(*br->else_branch, next);
      Transition t{l, then_entry, {}, {}, true, 0};
      Transition e{l, else_entry, {}, {}, false, 0};
      switch (br->kind) {
        case BranchKind::Guard:
          cfg_.kinds[l] = LabelKind::Branch;
          t.guard = br->guard.dnf;
          e.guard = br->guard.dnf.complement_integer();
          break;
        case BranchKind::Star:
          cfg_.kinds[l] = LabelKind::Nondet;
          break;
        case BranchKind::Prob:
          cfg_.kinds[l] = LabelKind::Prob;
          t.prob = br->prob;
          e.prob = 1 - br->prob;
          break;
      }
      add(std::move(t));
      add(std::move(e));
    } else if (const auto* w = stmt.as<WhileStmt>()) {
      cfg_.kinds[l] = LabelKind::Branch;
      Label body_entry = build(*w->body, l);
      add({l, body_entry, {}, w->guard.dnf, true, 0});
      add({l, next, {}, w->guard.dnf.complement_integer(), false, 0});
    }
    return l;
  }

 private:
  void add(Transition t) { cfg_.transitions.push_back(std::move(t)); }
  CFG& cfg_;
};

void sort_transitions(std::vector<Transition>& ts) {
  std::stable_sort(ts.begin(), ts.end(), [](const Transition& x, const Transition& y) {
    if (x.src != y.src) return x.src < y.src;
    return x.then_edge && !y.then_edge;
  });
}

void collect_labels(const Stmt& stmt, std::set<Label>& out) {
  if (stmt.label) out.insert(stmt.label);
  if (const auto* seq = stmt.as<SeqStmt>()) {
    for (const auto& s : seq->items) collect_labels(*s, out);
  } else if (const auto* br = stmt.as<IfStmt>()) {
    collect_labels(*br->then_branch, out);
    collect_labels(*br->else_branch, out);
  } else if (const auto* w = stmt.as<WhileStmt>()) {
    collect_labels(*w->body, out);
  }
}

void collect_loops(const Stmt& stmt, const CFG& cfg, std::vector<LoopNode>& out) {
  if (const auto* seq = stmt.as<SeqStmt>()) {
    for (const auto& s : seq->items) collect_loops(*s, cfg, out);
  } else if (const auto* br = stmt.as<IfStmt>()) {
    collect_loops(*br->then_branch, cfg, out);
    collect_loops(*br->else_branch, cfg, out);
  } else if (const auto* w = stmt.as<WhileStmt>()) {
    LoopNode node;
    node.head = stmt.label;
    node.guard = w->guard.dnf;
    collect_labels(*w->body, node.body);
    for (std::size_t i : cfg.outgoing(stmt.label)) {
      if (!cfg.transitions[i].then_edge) node.exit = cfg.transitions[i].dst;
    }
    collect_loops(*w->body, cfg, node.children);
    out.push_back(std::move(node));
  }
}

}  // namespace

CFG build_cfg(const ProgramAST& prog) {
  CFG cfg;
  cfg.pvars = prog.pvars;
  cfg.rvars = prog.rvars;
  cfg.dists = prog.dists;
  cfg.l_out = prog.terminal;
  cfg.kinds[cfg.l_out] = LabelKind::Terminal;
  Builder builder(cfg);
  cfg.l_in = builder.build(*prog.root, cfg.l_out);
  sort_transitions(cfg.transitions);

  // Structured programs cannot contain dead code, but check anyway so later stages may rely on it.
  std::set<Label> seen{cfg.l_in};
  std::deque<Label> work{cfg.l_in};
  while (!work.empty()) {
    Label l = work.front();
    work.pop_front();
    for (std::size_t i : cfg.outgoing(l)) {
      if (seen.insert(cfg.transitions[i].dst).second) work.push_back(cfg.transitions[i].dst);
    }
  }
  for (const auto& [l, k] : cfg.kinds) {
    if (!seen.count(l)) throw SemanticError("label " + std::to_string(l) + " is unreachable");
  }
  return cfg;
}

std::vector<LoopNode> loop_forest(const CFG& cfg, const ProgramAST& prog) {
  std::vector<LoopNode> out;
  collect_loops(*prog.root, cfg, out);
  return out;
}

CFG loop_subcfg(const CFG& cfg, const LoopNode& node) {
  CFG sub;
  sub.pvars = cfg.pvars;
  sub.rvars = cfg.rvars;
  sub.dists = cfg.dists;
  sub.l_in = node.head;
  sub.l_out = node.exit;
  sub.kinds[node.head] = cfg.kind(node.head);
  for (Label l : node.body) sub.kinds[l] = cfg.kind(l);
  sub.kinds[node.exit] = LabelKind::Terminal;
  for (const auto& t : cfg.transitions) {
    if (t.src == node.head || node.body.count(t.src)) sub.transitions.push_back(t);
  }
  return sub;
}

std::string to_dot(const CFG& cfg) {
  std::vector<std::string> order = cfg.pvars;
  order.insert(order.end(), cfg.rvars.begin(), cfg.rvars.end());
  std::ostringstream out;
  out << "digraph cfg {\n";
  for (const auto& [l, k] : cfg.kinds) {
    out << "  n" << l << " [label=\"" << l << "\"";
    if (k == LabelKind::Terminal) out << ", shape=doublecircle";
    else if (k == LabelKind::Prob) out << ", shape=diamond";
    else if (k == LabelKind::Nondet) out << ", shape=box";
    else out << ", shape=circle";
    out << "];\n";
  }
  for (const auto& t : cfg.transitions) {
    std::string text;
    switch (cfg.kind(t.src)) {
      case LabelKind::Assign:
        text = t.update.is_identity() ? "skip" : t.update.var + " := " + t.update.rhs.to_string(order);
        break;
      case LabelKind::Branch: text = t.guard.to_string(order); break;
      case LabelKind::Prob: text = to_string(t.prob); break;
      case LabelKind::Nondet: text = "*"; break;
      case LabelKind::Terminal: break;
    }
    out << "  n" << t.src << " -> n" << t.dst << " [label=\"" << text << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace dsmv

namespace dsmv {

std::vector<SamplePoint> sample_points(const Update& upd, const std::vector<std::string>& rvars,
                                       const DistMap& dists) {
  std::vector<SamplePoint> points{{{}, Rational(1)}};
  if (upd.is_identity()) return points;
  for (const auto& r : rvars) {
    if (upd.rhs.coefficient(r) == 0) continue;
    auto it = dists.find(r);
    if (it == dists.end()) throw UnboundedSupportError("sampling variable " + r + " has no finite distribution");
    std::vector<SamplePoint> next;
    for (const auto& p : points) {
      for (const auto& [value, prob] : it->second.support()) {
        SamplePoint q = p;
        q.values[r] = Rational(value);
        q.prob *= prob;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  // Variables that occur in the update but are neither program nor declared sampling variables.
  for (const auto& [name, coeff] : upd.rhs.terms()) {
    if (dists.count(name) && std::find(rvars.begin(), rvars.end(), name) == rvars.end()) {
      throw UnboundedSupportError("sampling variable " + name + " is not declared");
    }
  }
  return points;
}

}  // namespace dsmv
