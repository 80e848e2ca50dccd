#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dsmv/cfg.hpp"
#include "dsmv/frontend.hpp"
#include "dsmv/invariant.hpp"

namespace fixtures {

inline std::string data(const std::string& rel) { return std::string(DSMV_DATA_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline bool exists(const std::string& path) { return std::ifstream(path).good(); }

/// A shipped program with its control flow graph, its invariant (guard-derived when no
/// .inv file exists) and the sub-CFG of its first top-level loop.
struct Fixture {
  dsmv::ProgramAST prog;
  dsmv::CFG cfg;
  dsmv::Invariant inv;
  std::vector<dsmv::LoopNode> forest;
  dsmv::CFG outer;

  explicit Fixture(const std::string& name) {
    prog = dsmv::parse_program(slurp(data("programs/" + name + ".pp")));
    cfg = dsmv::build_cfg(prog);
    std::string inv_path = data("inv/" + name + ".inv");
    inv = exists(inv_path) ? dsmv::load_invariant(slurp(inv_path), cfg) : dsmv::guard_default_invariant(cfg);
    forest = dsmv::loop_forest(cfg, prog);
    outer = dsmv::loop_subcfg(cfg, forest.front());
  }
};

}  // namespace fixtures
