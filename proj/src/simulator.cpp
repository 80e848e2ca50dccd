#include "dsmv/simulator.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "dsmv/errors.hpp"

namespace dsmv {

// ---------------------------------------------------------------------------------------
// Random numbers and schedulers

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : key_(mix(mix(seed) ^ (stream * kGamma + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t Rng::next() { return mix(key_ + (++counter_) * kGamma); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Reject the top partial block so every residue is equally likely.
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    std::uint64_t v = next();
    if (v < limit) return v % n;
  }
}

bool Rng::bernoulli(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

Policy parse_policy(const std::string& name) {
  if (name == "then" || name == "always-then") return Policy::AlwaysThen;
  if (name == "else" || name == "always-else") return Policy::AlwaysElse;
  if (name == "uniform" || name == "uniform-random") return Policy::UniformRandom;
  if (name == "round-robin" || name == "rr") return Policy::RoundRobin;
  throw InputError("unknown scheduler '" + name + "' (expected then, else, uniform or round-robin)");
}

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::AlwaysThen: return "always-then";
    case Policy::AlwaysElse: return "always-else";
    case Policy::UniformRandom: return "uniform-random";
    case Policy::RoundRobin: return "round-robin";
  }
  return "?";
}

bool Scheduler::choose_then(std::uint64_t history_length) const {
  switch (policy) {
    case Policy::AlwaysThen: return true;
    case Policy::AlwaysElse: return false;
    case Policy::RoundRobin: return history_length % 2 == 0;
    case Policy::UniformRandom: return (Rng::mix(seed ^ Rng::mix(history_length + kGamma)) & 1) == 0;
  }
  return true;
}

// ---------------------------------------------------------------------------------------
// Compiled CFG

namespace {

std::int64_t to_i64(const Integer& v, const char* what) {
  if (!mpz_fits_slong_p(v.get_mpz_t())) throw UnsupportedFeatureError(std::string(what) + " exceeds 64 bits");
  return static_cast<std::int64_t>(mpz_get_si(v.get_mpz_t()));
}

Integer lcm_den(const LinearExpr& e) {
  Integer l = e.constant().get_den();
  for (const auto& [v, c] : e.terms()) {
    Integer d = c.get_den();
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
  }
  return l;
}

}  // namespace

Simulator::Simulator(const CFG& cfg) : cfg_(cfg) {
  for (const auto& v : cfg_.pvars) slot_.emplace(v, static_cast<int>(slot_.size()));
  std::map<std::string, int> sampler_of;
  for (const auto& v : cfg_.rvars) {
    int slot = static_cast<int>(slot_.size());
    slot_.emplace(v, slot);
    auto it = cfg_.dists.find(v);
    if (it == cfg_.dists.end()) continue;
    Sampler s;
    s.index = slot;
    Integer total = 1;
    for (const auto& [value, p] : it->second.support()) {
      Integer d = p.get_den();
      mpz_lcm(total.get_mpz_t(), total.get_mpz_t(), d.get_mpz_t());
    }
    s.total = static_cast<std::uint64_t>(to_i64(total, "distribution denominator"));
    std::uint64_t acc = 0;
    for (const auto& [value, p] : it->second.support()) {
      acc += static_cast<std::uint64_t>(to_i64(Rational(p * total).get_num(), "probability numerator"));
      s.values.push_back(value);
      s.cumulative.push_back(acc);
    }
    sampler_of.emplace(v, static_cast<int>(samplers_.size()));
    samplers_.push_back(std::move(s));
  }

  auto slot = [&](const std::string& v) {
    auto it = slot_.find(v);
    if (it == slot_.end()) throw SemanticError("unknown variable '" + v + "'");
    return it->second;
  };
  auto affine = [&](const LinearExpr& e) {
    Affine f;
    Integer den = lcm_den(e);
    f.den = to_i64(den, "coefficient denominator");
    for (const auto& [v, c] : e.terms()) f.terms.emplace_back(slot(v), to_i64(Rational(c * den).get_num(), "coefficient"));
    f.constant = to_i64(Rational(e.constant() * den).get_num(), "constant");
    return f;
  };
  auto guard = [&](const PolyUnion& u) {
    std::vector<std::vector<Row>> dnf;
    for (const auto& poly : u.disjuncts()) {
      std::vector<Row> rows;
      for (const auto& c : poly.rows()) {
        LinearExpr form = c.lhs - LinearExpr(c.rhs);
        Affine f = affine(form);
        rows.push_back(Row{f.terms, -f.constant});
      }
      dnf.push_back(std::move(rows));
    }
    return dnf;
  };

  for (const auto& [label, kind] : cfg_.kinds) nodes_[label].kind = kind;
  for (const auto& t : cfg_.transitions) {
    Arc arc;
    arc.dst = t.dst;
    switch (cfg_.kind(t.src)) {
      case LabelKind::Assign:
        if (!t.update.is_identity()) {
          arc.target = slot(t.update.var);
          arc.rhs = affine(t.update.rhs);
          for (const auto& [v, c] : t.update.rhs.terms()) {
            auto it = sampler_of.find(v);
            if (it != sampler_of.end()) arc.samplers.push_back(it->second);
            else if (slot(v) >= static_cast<int>(cfg_.pvars.size())) {
              throw UnboundedSupportError("sampling variable '" + v + "' has no distribution");
            }
          }
        }
        break;
      case LabelKind::Branch: arc.guard = guard(t.guard); break;
      case LabelKind::Prob:
        arc.prob_num = static_cast<std::uint64_t>(to_i64(t.prob.get_num(), "probability numerator"));
        arc.prob_den = static_cast<std::uint64_t>(to_i64(t.prob.get_den(), "probability denominator"));
        break;
      default: break;
    }
    nodes_[t.src].arcs.push_back(std::move(arc));
  }
}

std::int64_t Simulator::eval(const Affine& f, const std::vector<std::int64_t>& state) {
  __int128 sum = f.constant;
  for (const auto& [i, c] : f.terms) sum += static_cast<__int128>(c) * state[static_cast<std::size_t>(i)];
  if (sum % f.den != 0) throw DomainError("assignment produced a non-integer value");
  __int128 value = sum / f.den;
  if (value > INT64_MAX || value < INT64_MIN) throw DomainError("assignment overflowed 64-bit integers");
  return static_cast<std::int64_t>(value);
}

bool Simulator::holds(const std::vector<std::vector<Row>>& dnf, const std::vector<std::int64_t>& state) {
  for (const auto& rows : dnf) {
    bool all = true;
    for (const auto& row : rows) {
      __int128 sum = 0;
      for (const auto& [i, c] : row.terms) sum += static_cast<__int128>(c) * state[static_cast<std::size_t>(i)];
      if (sum > row.bound) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

Label Simulator::step_state(Label label, std::vector<std::int64_t>& state, const Scheduler& sched, Rng& rng,
                            std::uint64_t& choices) const {
  const Node& node = nodes_.at(label);
  switch (node.kind) {
    case LabelKind::Terminal: return label;
    case LabelKind::Assign: {
      const Arc& arc = node.arcs.front();
      for (int si : arc.samplers) {
        const Sampler& s = samplers_[static_cast<std::size_t>(si)];
        std::uint64_t u = rng.below(s.total);
        std::size_t k = static_cast<std::size_t>(std::upper_bound(s.cumulative.begin(), s.cumulative.end(), u) -
                                                 s.cumulative.begin());
        state[static_cast<std::size_t>(s.index)] = s.values[k];
      }
      if (arc.target >= 0) state[static_cast<std::size_t>(arc.target)] = eval(arc.rhs, state);
      return arc.dst;
    }
    case LabelKind::Branch: return holds(node.arcs[0].guard, state) ? node.arcs[0].dst : node.arcs[1].dst;
    case LabelKind::Prob:
      return rng.bernoulli(node.arcs[0].prob_num, node.arcs[0].prob_den) ? node.arcs[0].dst : node.arcs[1].dst;
    case LabelKind::Nondet: return sched.choose_then(choices++) ? node.arcs[0].dst : node.arcs[1].dst;
  }
  return label;
}

std::vector<std::int64_t> Simulator::state_of(const Valuation& v) const {
  std::vector<std::int64_t> state(slot_.size(), 0);
  for (const auto& name : cfg_.pvars) {
    auto it = v.find(name);
    if (it == v.end()) throw InputError("no initial value for '" + name + "'");
    state[static_cast<std::size_t>(slot_.at(name))] = it->second;
  }
  for (const auto& [name, value] : v) {
    auto it = slot_.find(name);
    if (it == slot_.end() || it->second >= static_cast<int>(cfg_.pvars.size())) {
      throw InputError("'" + name + "' is not a program variable");
    }
  }
  return state;
}

Valuation Simulator::valuation_of(const std::vector<std::int64_t>& state) const {
  Valuation v;
  for (const auto& name : cfg_.pvars) v[name] = state[static_cast<std::size_t>(slot_.at(name))];
  return v;
}

Configuration Simulator::step(const Configuration& conf, const Scheduler& sched, Rng& rng,
                              std::uint64_t& choices) const {
  auto state = state_of(conf.valuation);
  Label next = step_state(conf.label, state, sched, rng, choices);
  return Configuration{next, valuation_of(state)};
}

Configuration step(const CFG& cfg, const Configuration& conf, const Scheduler& sched, Rng& rng,
                   std::uint64_t& choices) {
  return Simulator(cfg).step(conf, sched, rng, choices);
}

// ---------------------------------------------------------------------------------------
// Runs

namespace {

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

RunStats run_many(const CFG& cfg, const Configuration& init, const Scheduler& sched, std::size_t n,
                  std::size_t budget, std::uint64_t seed, unsigned threads) {
  if (budget < 1) throw InputError("budget must be at least 1");
  Simulator sim(cfg);
  const auto init_state = sim.state_of(init.valuation);
  if (!cfg.contains(init.label)) throw UnknownLabelError("label " + std::to_string(init.label) + " is not in the program");
  RunStats stats;
  stats.runs = n;
  stats.budget = budget;
  stats.times.assign(n, std::nullopt);
  stats.arrivals.assign(n, {});
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng(seed, i);
    Scheduler s{sched.policy, Rng::mix(sched.seed ^ (i * kGamma))};
    auto state = init_state;
    Label label = init.label;
    std::uint64_t choices = 0;
    auto& arrivals = stats.arrivals[i];
    if (label == cfg.l_in) arrivals.push_back(0);
    std::uint64_t steps = 0;
    while (label != cfg.l_out && steps < budget) {
      label = sim.step_state(label, state, s, rng, choices);
      ++steps;
      if (label == cfg.l_in) arrivals.push_back(steps);
    }
    if (label == cfg.l_out) stats.times[i] = steps;
  });
  stats.terminated = static_cast<std::size_t>(
      std::count_if(stats.times.begin(), stats.times.end(), [](const auto& t) { return t.has_value(); }));
  return stats;
}

std::vector<Configuration> run_trace(const Simulator& sim, const Configuration& init, const Scheduler& sched,
                                     Rng& rng, std::size_t budget) {
  std::vector<Configuration> trace{init};
  auto state = sim.state_of(init.valuation);
  Label label = init.label;
  std::uint64_t choices = 0;
  for (std::size_t steps = 0; label != sim.cfg().l_out && steps < budget; ++steps) {
    label = sim.step_state(label, state, sched, rng, choices);
    trace.push_back(Configuration{label, sim.valuation_of(state)});
  }
  return trace;
}

MartingaleTrace trace_eta(const DSMMap& dsm, const std::vector<Configuration>& trace) {
  MartingaleTrace out;
  for (std::size_t n = 0; n < trace.size(); ++n) {
    const auto& conf = trace[n];
    auto it = dsm.eta.find(conf.label);
    if (it == dsm.eta.end()) throw CoverageError("no expression for label " + std::to_string(conf.label));
    Rational x = it->second.evaluate([&](const std::string& v) {
      auto vt = conf.valuation.find(v);
      if (vt == conf.valuation.end()) throw CoverageError("expression mentions unknown variable '" + v + "'");
      return Rational(static_cast<long>(vt->second));
    });
    out.y.push_back(x + dsm.epsilon * static_cast<long>(n));
    out.x.push_back(std::move(x));
  }
  return out;
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  double nn = static_cast<double>(n);
  double p = static_cast<double>(k) / nn;
  double z2 = z * z;
  double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

// ---------------------------------------------------------------------------------------
// Counterexample analytics

Rational barrier_absorption_prob(std::int64_t yhat) {
  if (yhat <= 0 || yhat % 2 != 0) throw DomainError("barrier horizon must be even and positive");
  Integer central;
  mpz_bin_uiui(central.get_mpz_t(), static_cast<unsigned long>(yhat), static_cast<unsigned long>(yhat / 2));
  Integer pow2;
  mpz_ui_pow_ui(pow2.get_mpz_t(), 2, static_cast<unsigned long>(yhat));
  Rational r(central, pow2);
  r.canonicalize();
  return Rational(1) - r;
}

namespace {

constexpr mpfr_prec_t kPrec = 256;

struct Mpfr {
  mpfr_t v;
  Mpfr() { mpfr_init2(v, kPrec); }
  ~Mpfr() { mpfr_clear(v); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;

  Rational exact() const {
    Rational q;
    mpfr_get_q(q.get_mpq_t(), v);
    return q;
  }
};

}  // namespace

Rational ce_constant_upper(std::int64_t y0) {
  if (y0 <= 0) throw DomainError("y0 must be positive");
  Mpfr e, pi, root, den, d;
  mpfr_set_ui(e.v, 1, MPFR_RNDU);
  mpfr_exp(e.v, e.v, MPFR_RNDU);
  mpfr_const_pi(pi.v, MPFR_RNDD);
  mpfr_set_si(root.v, static_cast<long>(y0), MPFR_RNDD);
  mpfr_sqrt(root.v, root.v, MPFR_RNDD);
  mpfr_mul(den.v, pi.v, root.v, MPFR_RNDD);
  mpfr_div(d.v, e.v, den.v, MPFR_RNDU);
  return d.exact();
}

Rational nontermination_lower_bound(std::int64_t y0, std::int64_t k) {
  if (y0 <= 0 || y0 % 2 != 0) throw DomainError("y0 must be even and positive");
  if (k < 0) throw DomainError("k must be nonnegative");
  Rational d = ce_constant_upper(y0);
  if (d >= 1) throw DomainError("d = e/(pi*sqrt(y0)) is not below 1 for y0 = " + std::to_string(y0));
  Rational product = 1;
  Rational scale = 1;
  for (std::int64_t i = 0; i < k; ++i) {
    product *= Rational(1) - d / scale;
    scale *= 2;
  }
  return product;
}

Rational hoeffding_bound(std::int64_t n, const Rational& lam, const Rational& a, const Rational& b,
                         const Rational& eps) {
  if (b <= a) throw DomainError("hoeffding_bound needs b > a");
  if (n <= 0) return 1;
  Rational shift = lam + eps * static_cast<long>(n);
  if (shift <= 0) return 1;
  Rational width = b - a;
  Rational t = 2 * shift * shift / (width * width * static_cast<long>(n));
  Mpfr x;
  mpfr_set_q(x.v, t.get_mpq_t(), MPFR_RNDD);  // a smaller exponent gives a larger bound
  mpfr_neg(x.v, x.v, MPFR_RNDN);                // exact
  mpfr_exp(x.v, x.v, MPFR_RNDU);
  Rational r = x.exact();
  return r > 1 ? Rational(1) : r;
}

std::size_t ce_survivors(std::int64_t y0, std::int64_t k, std::size_t runs, std::uint64_t seed, unsigned threads) {
  if (y0 < 0) throw DomainError("y0 must be nonnegative");
  std::vector<unsigned char> survived(runs, 0);
  parallel_for(runs, threads, [&](std::size_t r) {
    Rng rng(seed, r);
    std::uint64_t bits = 0;
    int left = 0;
    std::int64_t x = 1;
    __int128 y = y0;
    for (std::int64_t i = 0; i < k; ++i) {
      if (y + 1 > INT64_MAX) throw DomainError("y overflowed 64-bit integers");
      std::int64_t remaining = static_cast<std::int64_t>(y) + 1;  // z runs from y down to 0
      while (remaining > 0 && x < 2 && 2 - x <= remaining) {
        if (left == 0) {
          bits = rng.next();
          left = 64;
        }
        x += (bits & 1) ? 1 : -1;
        bits >>= 1;
        --left;
        --remaining;
      }
      y *= 4;
      x -= 1;
      if (x < 1) return;  // leaves the outer loop
    }
    survived[r] = 1;
  });
  return static_cast<std::size_t>(std::count(survived.begin(), survived.end(), 1));
}

namespace {

// 1 - C(yhat, yhat/2)/2^yhat with yhat = y0 * 4^i, through log-gamma for large horizons.
double absorption_estimate(std::int64_t y0, std::int64_t i) {
  if (i < 4 && y0 <= 64) return to_double(barrier_absorption_prob(y0 << (2 * i)));
  Mpfr yh, half, lg1, lg2, ln2, acc;
  mpfr_set_si(yh.v, static_cast<long>(y0), MPFR_RNDN);
  mpfr_mul_2ui(yh.v, yh.v, static_cast<unsigned long>(2 * i), MPFR_RNDN);
  mpfr_div_2ui(half.v, yh.v, 1, MPFR_RNDN);
  mpfr_add_ui(lg1.v, yh.v, 1, MPFR_RNDN);
  mpfr_lngamma(lg1.v, lg1.v, MPFR_RNDN);
  mpfr_add_ui(lg2.v, half.v, 1, MPFR_RNDN);
  mpfr_lngamma(lg2.v, lg2.v, MPFR_RNDN);
  mpfr_const_log2(ln2.v, MPFR_RNDN);
  mpfr_mul(ln2.v, ln2.v, yh.v, MPFR_RNDN);
  mpfr_mul_2ui(lg2.v, lg2.v, 1, MPFR_RNDN);
  mpfr_sub(acc.v, lg1.v, lg2.v, MPFR_RNDN);
  mpfr_sub(acc.v, acc.v, ln2.v, MPFR_RNDN);
  mpfr_exp(acc.v, acc.v, MPFR_RNDN);
  return 1.0 - mpfr_get_d(acc.v, MPFR_RNDN);
}

}  // namespace

CEReport analyze_ce(std::int64_t y0, std::int64_t k, std::size_t runs, std::uint64_t seed, unsigned threads) {
  CEReport rep;
  rep.y0 = y0;
  rep.k = k;
  rep.runs = runs;
  rep.bound = nontermination_lower_bound(y0, k);
  rep.d = ce_constant_upper(y0);
  for (std::int64_t i = 0; i < k; ++i) rep.absorption.push_back(absorption_estimate(y0, i));
  rep.survivors = ce_survivors(y0, k, runs, seed, threads);
  rep.frequency = runs ? static_cast<double>(rep.survivors) / static_cast<double>(runs) : 0.0;
  rep.ci = wilson_interval(rep.survivors, runs);
  double b = to_double(rep.bound);
  rep.sigma = runs ? std::sqrt(b * (1 - b) / static_cast<double>(runs)) : 0.0;
  rep.agrees = rep.frequency >= b - 3 * rep.sigma;
  return rep;
}

std::string CEReport::to_string() const {
  std::ostringstream out;
  out.precision(6);
  out << "y0 " << y0 << ", outer iterations " << k << ", runs " << runs << "\n";
  out << "d (rounded up) " << to_decimal(d, 8) << "\n";
  for (std::size_t i = 0; i < absorption.size(); ++i) {
    out << "iteration " << i << ": yhat = " << y0 << "*4^" << i << ", absorption probability " << absorption[i]
        << ", analytic factor " << to_decimal(Rational(1) - d / Rational(Integer(1) << static_cast<unsigned>(i)), 6)
        << "\n";
  }
  out << "analytic survival lower bound " << to_decimal(bound, 6) << "\n";
  out << "empirical survival " << survivors << "/" << runs << " = " << frequency << " (95% Wilson [" << ci.first
      << ", " << ci.second << "])\n";
  out << (agrees ? "agreement" : "DISAGREEMENT") << ": empirical " << (agrees ? ">=" : "<")
      << " bound - 3 sigma (sigma " << sigma << ")\n";
  return out.str();
}

}  // namespace dsmv
