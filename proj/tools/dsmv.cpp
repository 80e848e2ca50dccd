// dsmv: command-line front end for parsing, DSM-map synthesis and checking, modular
// termination proofs, derivation checking and simulation.
//
// Exit codes: 0 success / proved / valid, 1 not proved / check failed / infeasible,
// 2 input or usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dsmv/derivation.hpp"
#include "dsmv/engine.hpp"
#include "dsmv/errors.hpp"
#include "dsmv/simulator.hpp"
#include "dsmv/synthesis.hpp"

using json = nlohmann::ordered_json;
using namespace dsmv;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json rational_json(const Rational& q) { return to_string(q); }

json dsm_json(const DSMMap& m, const std::vector<std::string>& order) {
  json eta = json::object();
  for (const auto& [l, e] : m.eta) eta[std::to_string(l)] = e.to_string(order);
  return json{{"epsilon", rational_json(m.epsilon)},
              {"a", rational_json(m.a)},
              {"b", rational_json(m.b)},
              {"c", rational_json(m.c)},
              {"eta", eta}};
}

struct Loaded {
  ProgramAST prog;
  CFG cfg;
  Invariant inv;
};

Loaded load(const std::string& prog_path, const std::string& inv_path) {
  Loaded l{parse_program(read_file(prog_path)), {}, {}};
  l.cfg = build_cfg(l.prog);
  l.inv = inv_path.empty() ? guard_default_invariant(l.cfg) : load_invariant(read_file(inv_path), l.cfg);
  return l;
}

void collect(const LoopNode& node, std::vector<const LoopNode*>& out) {
  for (const auto& child : node.children) collect(child, out);
  out.push_back(&node);
}

// Loops in post-order (inner loops first).
std::vector<const LoopNode*> all_loops(const std::vector<LoopNode>& forest) {
  std::vector<const LoopNode*> out;
  for (const auto& root : forest) collect(root, out);
  return out;
}

const LoopNode& pick_loop(const std::vector<LoopNode>& forest, int head) {
  for (const auto* node : all_loops(forest)) {
    if (node->head == head) return *node;
  }
  throw InputError("label " + std::to_string(head) + " is not a loop head");
}

// ---------------------------------------------------------------------------------------

int cmd_parse(const std::string& path, bool emit_cfg, bool as_json) {
  auto prog = parse_program(read_file(path));
  CFG cfg = build_cfg(prog);
  if (as_json) {
    json arcs = json::array();
    for (const auto& t : cfg.transitions) {
      json arc{{"src", t.src}, {"dst", t.dst}, {"kind", to_string(cfg.kind(t.src))}};
      switch (cfg.kind(t.src)) {
        case LabelKind::Assign:
          arc["update"] = t.update.is_identity() ? "skip" : t.update.var + " := " + t.update.rhs.to_string(cfg.pvars);
          break;
        case LabelKind::Branch: arc["guard"] = t.guard.to_string(cfg.pvars); break;
        case LabelKind::Prob: arc["prob"] = to_string(t.prob); break;
        default: arc["branch"] = t.then_edge ? "then" : "else"; break;
      }
      arcs.push_back(arc);
    }
    json out{{"pvars", cfg.pvars}, {"rvars", cfg.rvars}, {"l_in", cfg.l_in}, {"l_out", cfg.l_out},
             {"labels", cfg.labels().size()}, {"transitions", arcs}, {"source", to_source(prog)}};
    std::cout << out.dump(2) << "\n";
  } else if (emit_cfg) {
    std::cout << to_dot(cfg);
  } else {
    std::cout << to_source(prog) << "\n";
    std::cout << "# program variables:";
    for (const auto& v : cfg.pvars) std::cout << " " << v;
    std::cout << "\n# sampling variables:";
    for (const auto& v : cfg.rvars) std::cout << " " << v;
    std::cout << "\n# labels " << cfg.l_in << ".." << cfg.l_out << ", " << cfg.transitions.size() << " transitions\n";
  }
  return kOk;
}

int cmd_synth(const std::string& path, const std::string& inv_path, int loop_head, bool every_loop,
              const std::string& dump_lp, const std::string& emit_cert, bool as_json) {
  auto t_total = std::chrono::steady_clock::now();
  Loaded l = load(path, inv_path);
  auto forest = loop_forest(l.cfg, l.prog);
  std::vector<const LoopNode*> targets;
  if (loop_head) targets.push_back(&pick_loop(forest, loop_head));
  else if (every_loop) targets = all_loops(forest);
  else for (const auto& root : forest) targets.push_back(&root);
  if (targets.empty()) throw InputError("the program has no loop");
  if (!emit_cert.empty() && targets.size() != 1) throw InputError("--emit-cert needs exactly one selected loop");

  SynthesisOptions options;
  options.keep_lp_text = !dump_lp.empty();
  bool all_ok = true;
  std::string lp_dump;
  json results = json::array();
  for (const auto* node : targets) {
    auto t0 = std::chrono::steady_clock::now();
    CFG sub = loop_subcfg(l.cfg, *node);
    SynthesisOutcome out = synthesize_dsm(sub, restrict_to(l.inv, sub), options);
    double runtime = seconds_since(t0);
    all_ok = all_ok && out.success();
    if (options.keep_lp_text) lp_dump += "# loop " + std::to_string(node->head) + "\n" + out.lp_text;
    if (out.success() && !emit_cert.empty()) write_file(emit_cert, out.map.render(l.cfg.pvars));
    if (as_json) {
      json r{{"program", path}, {"loop", node->head}, {"result", out.success() ? "Success" : "Failure"},
             {"runtime_seconds", runtime}, {"lp_rows", out.lp_rows}, {"lp_columns", out.lp_columns}};
      if (out.success()) {
        r["eta_in"] = out.map.eta.at(node->head).to_string(l.cfg.pvars);
        r["interval"] = {rational_json(out.map.a), rational_json(out.map.b)};
        r["dsm"] = dsm_json(out.map, l.cfg.pvars);
      } else {
        r["reason"] = to_string(out.reason);
        r["message"] = out.message;
      }
      results.push_back(r);
    } else {
      std::cout << "loop " << node->head << ": " << (out.success() ? "Success" : "Failure");
      std::cout.precision(3);
      std::cout << "  " << std::fixed << runtime << "s";
      std::cout.unsetf(std::ios::fixed);
      if (out.success()) {
        std::cout << "  eta(" << node->head << ") = " << out.map.eta.at(node->head).to_string(l.cfg.pvars)
                  << "  [a, b] = [" << to_string(out.map.a) << ", " << to_string(out.map.b) << "]\n";
        std::istringstream lines(out.map.render(l.cfg.pvars));
        for (std::string line; std::getline(lines, line);) std::cout << "  " << line << "\n";
      } else {
        std::cout << "  (" << to_string(out.reason) << ": " << out.message << ")\n";
      }
    }
  }
  if (!dump_lp.empty()) write_file(dump_lp, lp_dump);
  if (as_json) {
    std::cout << json{{"results", results}, {"total_seconds", seconds_since(t_total)}}.dump(2) << "\n";
  }
  return all_ok ? kOk : kFail;
}

int cmd_check(const std::string& path, const std::string& inv_path, const std::string& cert_path, int loop_head,
              bool partial, bool as_json) {
  Loaded l = load(path, inv_path);
  DSMMap map = parse_dsm(read_file(cert_path));
  auto forest = loop_forest(l.cfg, l.prog);
  const LoopNode* node = nullptr;
  if (loop_head) node = &pick_loop(forest, loop_head);
  else if (forest.size() == 1) node = &forest.front();
  else throw InputError("the program has " + std::to_string(forest.size()) + " top-level loops; pick one with --loop");
  CFG sub = loop_subcfg(l.cfg, *node);
  auto t0 = std::chrono::steady_clock::now();
  CheckReport rep = partial ? check_partial_dsm(map, sub, restrict_to(l.inv, sub))
                            : check_dsm(map, sub, restrict_to(l.inv, sub));
  double runtime = seconds_since(t0);
  if (as_json) {
    json v = json::array();
    for (const auto& x : rep.violations) {
      json w = json::object();
      for (const auto& [var, val] : x.witness) w[var] = to_string(val);
      v.push_back({{"condition", to_string(x.cond)}, {"label", x.label}, {"transition", x.transition},
                   {"what", x.what}, {"disjunct", x.disjunct},
                   {"worst", x.worst ? json(to_string(*x.worst)) : json("unbounded")}, {"witness", w}});
    }
    std::cout << json{{"program", path}, {"loop", node->head}, {"result", rep.pass() ? "pass" : "fail"},
                      {"obligations", rep.obligations}, {"runtime_seconds", runtime}, {"violations", v}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << rep.to_string(l.cfg.pvars);
  }
  return rep.pass() ? kOk : kFail;
}

int cmd_prove(const std::string& path, const std::string& inv_path, const std::string& emit_cert, bool as_json) {
  Loaded l = load(path, inv_path);
  auto t0 = std::chrono::steady_clock::now();
  ProofResult res = prove_termination(l.prog, l.inv);
  double runtime = seconds_since(t0);
  std::string tree = res.proved ? res.certificate.render(l.cfg.pvars) : "";
  if (res.proved && !emit_cert.empty()) write_file(emit_cert, tree);
  if (as_json) {
    json out{{"program", path}, {"result", res.proved ? "Proved" : "NotProved"}, {"runtime_seconds", runtime},
             {"loops_decided", res.visited_loops}};
    if (res.proved) {
      json loops = json::object();
      std::vector<const CertNode*> stack{&res.certificate};
      while (!stack.empty()) {
        const CertNode* n = stack.back();
        stack.pop_back();
        if (n->kind == CertNode::Kind::Loop) loops[std::to_string(n->label)] = dsm_json(n->dsm, l.cfg.pvars);
        for (const auto& c : n->children) stack.push_back(&c);
      }
      out["loops"] = loops;
      out["certificate"] = tree;
    } else {
      out["failing_loop"] = res.failing_loop;
      out["reason"] = res.reason;
    }
    std::cout << out.dump(2) << "\n";
  } else if (res.proved) {
    std::cout << "Proved: almost-sure termination under every scheduler\n" << tree;
  } else {
    std::cout << "NotProved: no DSM-map for the loop at label " << res.failing_loop << " (" << res.reason << ")\n";
  }
  return res.proved ? kOk : kFail;
}

int cmd_check_derivation(const std::string& path, const std::string& compile_step, bool as_json) {
  Derivation drv = parse_derivation(read_file(path));
  DerivationVerdict v = check_derivation(drv);
  std::optional<DSMMap> compiled;
  if (v.valid && !compile_step.empty()) compiled = compile_derivation(drv, compile_step);
  if (as_json) {
    json out{{"derivation", path}, {"steps", drv.steps.size()}, {"result", v.valid ? "Valid" : "Invalid"}};
    if (v.valid) {
      out["effective"] = {{"epsilon", rational_json(v.epsilon)}, {"a", rational_json(v.a)},
                          {"b", rational_json(v.b)}, {"c", rational_json(v.c)}};
    } else {
      out["step"] = v.step;
      out["rule"] = v.rule;
      out["reason"] = v.reason;
    }
    if (compiled) out["dsm"] = dsm_json(*compiled, {});
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << v.to_string() << "\n";
    if (compiled) std::cout << compiled->render();
  }
  return v.valid ? kOk : kFail;
}

Valuation parse_init(const std::string& text, const CFG& cfg) {
  Valuation v;
  for (const auto& name : cfg.pvars) v[name] = 0;
  std::string cleaned = text;
  for (char& ch : cleaned) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(cleaned);
  for (std::string item; in >> item;) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("--init entries look like name=value, got '" + item + "'");
    std::string name = item.substr(0, eq);
    if (!v.count(name)) throw InputError("'" + name + "' is not a program variable");
    try {
      std::size_t used = 0;
      v[name] = std::stoll(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InputError("'" + item + "' does not assign an integer");
    }
  }
  return v;
}

int cmd_sim(const std::string& path, const std::string& init_text, int label, std::size_t runs, std::size_t budget,
            const std::string& sched_name, std::uint64_t seed, unsigned threads, const std::string& trace_dsm,
            const std::string& histogram, bool as_json) {
  auto prog = parse_program(read_file(path));
  CFG cfg = build_cfg(prog);
  Configuration init{label ? label : cfg.l_in, parse_init(init_text, cfg)};
  Scheduler sched{parse_policy(sched_name), seed};
  RunStats st = run_many(cfg, init, sched, runs, budget, seed, threads);
  auto ci = wilson_interval(st.terminated, st.runs);
  Rational total = 0;
  std::uint64_t tmax = 0;
  for (const auto& t : st.times) {
    if (t) {
      total += Rational(static_cast<unsigned long>(*t));
      tmax = std::max(tmax, *t);
    }
  }
  std::optional<Rational> mean_t;
  if (st.terminated) mean_t = total / Rational(static_cast<unsigned long>(st.terminated));

  // Per-step differences of the supplied map along re-played runs (same streams as above).
  std::map<Rational, std::size_t> hist;
  std::optional<DSMMap> dsm;
  std::size_t outside = 0;
  if (!trace_dsm.empty()) {
    dsm = parse_dsm(read_file(trace_dsm));
    Simulator sim(cfg);
    std::size_t traced = std::min<std::size_t>(runs, 1000);
    for (std::size_t i = 0; i < traced; ++i) {
      Rng rng(seed, i);
      Scheduler s{sched.policy, Rng::mix(sched.seed ^ (i * 0x9E3779B97F4A7C15ULL))};
      auto trace = run_trace(sim, init, s, rng, budget);
      auto mt = trace_eta(*dsm, trace);
      for (std::size_t n = 0; n + 1 < mt.x.size(); ++n) {
        Rational d = mt.x[n + 1] - mt.x[n];
        ++hist[d];
        if (d < dsm->a || d > dsm->b) ++outside;
      }
    }
    if (!histogram.empty()) {
      std::ostringstream csv;
      csv << "difference,count\n";
      for (const auto& [d, n] : hist) csv << to_string(d) << "," << n << "\n";
      write_file(histogram, csv.str());
    }
  }

  if (as_json) {
    json out{{"program", path},
             {"scheduler", to_string(sched.policy)},
             {"seed", seed},
             {"runs", st.runs},
             {"budget", st.budget},
             {"terminated", st.terminated},
             {"censored", st.censored()},
             {"frequency", st.frequency()},
             {"wilson95", {ci.first, ci.second}},
             {"mean_steps", mean_t ? json(to_decimal(*mean_t, 6)) : json(nullptr)},
             {"max_steps", tmax}};
    if (dsm) {
      json h = json::object();
      for (const auto& [d, n] : hist) h[to_string(d)] = n;
      out["differences"] = h;
      out["outside_interval"] = outside;
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "runs " << st.runs << ", terminated " << st.terminated << ", censored at " << st.budget
              << " steps " << st.censored() << "\n";
    std::cout << "termination frequency " << st.frequency() << " (95% Wilson [" << ci.first << ", " << ci.second
              << "])\n";
    if (mean_t) std::cout << "mean steps of terminated runs " << to_decimal(*mean_t, 4) << ", max " << tmax << "\n";
    if (dsm) {
      std::cout << "one-step differences of the map (" << hist.size() << " distinct values, " << outside
                << " outside [" << to_string(dsm->a) << ", " << to_string(dsm->b) << "])\n";
      for (const auto& [d, n] : hist) std::cout << "  " << to_string(d) << "," << n << "\n";
    }
  }
  return kOk;
}

int cmd_analyze_ce(std::int64_t y0, std::int64_t k, std::size_t runs, std::uint64_t seed, unsigned threads,
                   bool as_json) {
  CEReport rep = analyze_ce(y0, k, runs, seed, threads);
  if (as_json) {
    json out{{"y0", rep.y0},
             {"k", rep.k},
             {"runs", rep.runs},
             {"d_upper", to_decimal(rep.d, 12)},
             {"bound", to_decimal(rep.bound, 12)},
             {"absorption", rep.absorption},
             {"survivors", rep.survivors},
             {"frequency", rep.frequency},
             {"wilson95", {rep.ci.first, rep.ci.second}},
             {"sigma", rep.sigma},
             {"agrees", rep.agrees}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << rep.to_string();
  }
  return rep.agrees ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsmv: almost-sure termination of probabilistic programs via DSM-maps"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string prog, inv, cert, dump_lp, emit_cert, drv, compile_step, init, sched = "uniform", trace_dsm, histogram;
  int loop = 0, label = 0;
  bool emit_cfg = false, every_loop = false, partial = false;
  std::size_t runs = 1000, budget = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::int64_t y0 = 100, k = 10;

  auto* parse = app.add_subcommand("parse", "Parse a program and print it or its control flow graph");
  parse->add_option("program", prog, "Program file (.pp)")->required();
  parse->add_flag("--emit-cfg", emit_cfg, "Print the control flow graph in DOT");

  auto* synth = app.add_subcommand("synth", "Synthesize DSM-maps by Farkas' lemma and linear programming");
  synth->add_option("program", prog, "Program file (.pp)")->required();
  synth->add_option("--inv", inv, "Invariant file (.inv); guard-derived invariants when absent");
  synth->add_option("--loop", loop, "Head label of the loop to synthesize for (default: top-level loops)");
  synth->add_flag("--all-loops", every_loop, "Synthesize for every loop, innermost first");
  synth->add_option("--dump-lp", dump_lp, "Write the assembled linear programs to this file");
  synth->add_option("--emit-cert", emit_cert, "Write the synthesized map to this file (.dsm)");

  auto* check = app.add_subcommand("check", "Check a DSM-map certificate exactly");
  check->add_option("program", prog, "Program file (.pp)")->required();
  check->add_option("--cert", cert, "Certificate file (.dsm)")->required();
  check->add_option("--inv", inv, "Invariant file (.inv); guard-derived invariants when absent");
  check->add_option("--loop", loop, "Head label of the loop the certificate is for");
  check->add_flag("--partial", partial, "Skip the lower-bound condition at the loop head");

  auto* prove = app.add_subcommand("prove", "Prove almost-sure termination loop by loop");
  prove->add_option("program", prog, "Program file (.pp)")->required();
  prove->add_option("--inv", inv, "Invariant file (.inv); guard-derived invariants when absent");
  prove->add_option("--emit-cert", emit_cert, "Write the proof tree to this file");

  auto* checkd = app.add_subcommand("check-derivation", "Check a derivation in the proof system");
  checkd->add_option("derivation", drv, "Derivation file (.drv)")->required();
  checkd->add_option("--compile", compile_step, "Compile the DSM-map concluded at this step");

  auto* sim = app.add_subcommand("sim", "Monte-Carlo simulation of the program's Markov decision process");
  sim->add_option("program", prog, "Program file (.pp)")->required();
  sim->add_option("--init", init, "Initial values, e.g. \"x=1,y=100\" (unlisted variables start at 0)");
  sim->add_option("--label", label, "Initial label (default: the entry label)");
  sim->add_option("--runs", runs, "Number of runs");
  sim->add_option("--budget", budget, "Step budget per run; longer runs are censored")->check(CLI::PositiveNumber);
  sim->add_option("--sched", sched, "Scheduler: then, else, uniform, round-robin");
  auto* sim_seed = sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--threads", threads, "Worker threads (results do not depend on it)");
  sim->add_option("--trace-dsm", trace_dsm, "Trace this DSM-map along the first 1000 runs");
  sim->add_option("--histogram", histogram, "Write the one-step difference histogram as CSV");

  auto* ce = app.add_subcommand("analyze-ce", "Non-termination analytics for the counterexample program");
  ce->add_option("--y0", y0, "Initial value of y (even)");
  ce->add_option("--k", k, "Number of outer iterations");
  ce->add_option("--runs", runs, "Number of Monte-Carlo runs");
  auto* ce_seed = ce->add_option("--seed", seed, "Random seed");
  ce->add_option("--threads", threads, "Worker threads (results do not depend on it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  bool as_json = format == "json";
  try {
    if (std::getenv("DSMV_CI") && ((*sim && sim_seed->count() == 0) || (*ce && ce_seed->count() == 0))) {
      throw InputError("randomized subcommands need an explicit --seed when DSMV_CI is set");
    }
    if (*parse) return cmd_parse(prog, emit_cfg, as_json);
    if (*synth) return cmd_synth(prog, inv, loop, every_loop, dump_lp, emit_cert, as_json);
    if (*check) return cmd_check(prog, inv, cert, loop, partial, as_json);
    if (*prove) return cmd_prove(prog, inv, emit_cert, as_json);
    if (*checkd) return cmd_check_derivation(drv, compile_step, as_json);
    if (*sim) return cmd_sim(prog, init, label, runs, budget, sched, seed, threads, trace_dsm, histogram, as_json);
    if (*ce) return cmd_analyze_ce(y0, k, runs, seed, threads, as_json);
  } catch (const InputError& e) {
    std::cerr << "dsmv: " << e.what() << "\n";
    return kInputError;
  } catch (const std::domain_error& e) {
    std::cerr << "dsmv: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
