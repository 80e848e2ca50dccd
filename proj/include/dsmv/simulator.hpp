#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsmv/cfg.hpp"
#include "dsmv/dsm.hpp"

namespace dsmv {

using Valuation = std::map<std::string, std::int64_t>;

struct Configuration {
  Label label = 0;
  Valuation valuation;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Counter-based generator: the k-th output of stream s under seed is a SplitMix64
/// finalization of (key(seed, s) + k * golden gamma), so substreams never interact.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform integer in [0, n), by rejection; n >= 1.
  std::uint64_t below(std::uint64_t n);
  /// True with probability num/den exactly.
  bool bernoulli(std::uint64_t num, std::uint64_t den);

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum class Policy { AlwaysThen, AlwaysElse, UniformRandom, RoundRobin };

Policy parse_policy(const std::string& name);  // "then", "else", "uniform", "round-robin"
std::string to_string(Policy policy);

/// Resolves nondeterministic choices as a function of (policy, seed, number of
/// nondeterministic choices made so far in the run).
struct Scheduler {
  Policy policy = Policy::UniformRandom;
  std::uint64_t seed = 0;

  bool choose_then(std::uint64_t history_length) const;
};

/// A CFG compiled to integer arithmetic for fast stepping.
class Simulator {
 public:
  explicit Simulator(const CFG& cfg);

  const CFG& cfg() const { return cfg_; }

  /// One MDP step. `choices` counts the nondeterministic choices made so far and is
  /// advanced when this step resolves one. The terminal label steps to itself.
  Configuration step(const Configuration& conf, const Scheduler& sched, Rng& rng, std::uint64_t& choices) const;

  /// Fast path over an index-addressed state (pvars in cfg order).
  Label step_state(Label label, std::vector<std::int64_t>& state, const Scheduler& sched, Rng& rng,
                   std::uint64_t& choices) const;

  std::vector<std::int64_t> state_of(const Valuation& v) const;
  Valuation valuation_of(const std::vector<std::int64_t>& state) const;

 private:
  struct Affine {
    std::vector<std::pair<int, std::int64_t>> terms;  // index -> scaled coefficient
    std::int64_t constant = 0;
    std::int64_t den = 1;                            // value = (sum + constant) / den
  };
  struct Row {
    std::vector<std::pair<int, std::int64_t>> terms;  // sum <= bound
    std::int64_t bound = 0;
  };
  struct Sampler {
    int index = 0;                                  // slot of the sampling variable
    std::vector<std::int64_t> values;
    std::vector<std::uint64_t> cumulative;          // numerators over `total`
    std::uint64_t total = 1;
  };
  struct Arc {
    Label dst = 0;
    int target = -1;               // assigned pvar slot, -1 for skip
    Affine rhs;
    std::vector<int> samplers;     // indices into samplers_
    std::vector<std::vector<Row>> guard;  // DNF
    std::uint64_t prob_num = 1;
    std::uint64_t prob_den = 1;
  };
  struct Node {
    LabelKind kind = LabelKind::Terminal;
    std::vector<Arc> arcs;  // then arc first
  };

  static std::int64_t eval(const Affine& f, const std::vector<std::int64_t>& state);
  static bool holds(const std::vector<std::vector<Row>>& dnf, const std::vector<std::int64_t>& state);

  CFG cfg_;
  std::map<Label, Node> nodes_;
  std::vector<Sampler> samplers_;
  std::map<std::string, int> slot_;
};

/// Convenience single step on a fresh compilation of `cfg`.
Configuration step(const CFG& cfg, const Configuration& conf, const Scheduler& sched, Rng& rng,
                   std::uint64_t& choices);

struct RunStats {
  std::size_t runs = 0;
  std::size_t terminated = 0;
  std::size_t budget = 0;
  /// Steps to reach the terminal label, nullopt for a run censored at the budget.
  std::vector<std::optional<std::uint64_t>> times;
  /// Per run: step indices at which the run arrived at the loop head l_in.
  std::vector<std::vector<std::uint64_t>> arrivals;

  std::size_t censored() const { return runs - terminated; }
  double frequency() const { return runs ? static_cast<double>(terminated) / static_cast<double>(runs) : 0.0; }
};

/// `n` independent runs, run i drawing from stream i of `seed` and scheduling with a
/// seed derived from (sched.seed, i). Results do not depend on `threads`.
RunStats run_many(const CFG& cfg, const Configuration& init, const Scheduler& sched, std::size_t n,
                  std::size_t budget, std::uint64_t seed, unsigned threads = 1);

/// Configurations visited by one run (initial configuration included), stopping at the
/// terminal label or after `budget` steps.
std::vector<Configuration> run_trace(const Simulator& sim, const Configuration& init, const Scheduler& sched,
                                     Rng& rng, std::size_t budget);

struct MartingaleTrace {
  std::vector<Rational> x;  // X_n = eta(l_n, v_n)
  std::vector<Rational> y;  // Y_n = X_n + n * epsilon
};

/// Throws CoverageError if the map has no expression for a visited label.
MartingaleTrace trace_eta(const DSMMap& dsm, const std::vector<Configuration>& trace);

/// Wilson score interval for k successes out of n at z standard deviations.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

/// 1 - C(yhat, yhat/2) / 2^yhat: probability that a symmetric +-1 walk from 1 reaches the
/// barrier 2 within yhat steps. DomainError unless yhat is even and positive.
Rational barrier_absorption_prob(std::int64_t yhat);

/// e / (pi * sqrt(y0)) rounded upward to a rational.
Rational ce_constant_upper(std::int64_t y0);

/// prod_{i<k} (1 - d / 2^i) with d = ce_constant_upper(y0): a lower bound on the
/// probability that the counterexample loop survives k outer iterations from x = 1, y = y0.
/// DomainError if y0 is odd or nonpositive, or if d >= 1.
Rational nontermination_lower_bound(std::int64_t y0, std::int64_t k);

/// exp(-2 (lam + n eps)^2 / (n (b - a)^2)) rounded upward; 1 when lam + n eps <= 0.
Rational hoeffding_bound(std::int64_t n, const Rational& lam, const Rational& a, const Rational& b,
                         const Rational& eps);

/// Number of runs of the counterexample program, started at x = 1 and y = y0, that are
/// still inside the outer loop after k outer iterations. Each inner loop performs y + 1
/// walk steps as in the program; a walk stops early once absorbed at 2 or once 2 is out of
/// reach in the remaining steps, which does not change the outcome.
std::size_t ce_survivors(std::int64_t y0, std::int64_t k, std::size_t runs, std::uint64_t seed,
                         unsigned threads = 1);

struct CEReport {
  std::int64_t y0 = 0;
  std::int64_t k = 0;
  std::size_t runs = 0;
  Rational d;                            // rounded up
  Rational bound;                        // nontermination_lower_bound(y0, k)
  std::vector<double> absorption;        // closed form at yhat = y0 * 4^i, i < k
  std::size_t survivors = 0;
  double frequency = 0.0;
  std::pair<double, double> ci;          // Wilson, 95%
  double sigma = 0.0;                    // binomial sd of the frequency at the bound
  bool agrees = false;                   // frequency >= bound - 3 sigma

  std::string to_string() const;
};

CEReport analyze_ce(std::int64_t y0, std::int64_t k, std::size_t runs, std::uint64_t seed, unsigned threads = 1);

}  // namespace dsmv
