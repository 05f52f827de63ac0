#include "kflow/random.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "kflow/error.hpp"
#include "kflow/primitives.hpp"

namespace kflow {

namespace {

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
  return xs[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(xs.size()) - 1))];
}

std::vector<std::string> pick_primitives(Rng& rng, int max_count) {
  auto names = builtin_primitive_names();
  std::shuffle(names.begin(), names.end(), rng);
  names.resize(static_cast<std::size_t>(uniform(rng, 1, max_count)));
  return names;
}

Term random_pattern(Rng& rng, const std::vector<Term>& leaves, const std::vector<Tag>& ctors,
                    int depth) {
  if (depth == 0 || ctors.empty() || chance(rng, 0.35)) return pick(rng, leaves);
  Tag tag = pick(rng, ctors);
  std::vector<Term> kids;
  for (std::size_t i = 0; i < tag_arity(tag); ++i) {
    kids.push_back(random_pattern(rng, leaves, ctors, depth - 1));
  }
  return make_term(tag, {}, kids);
}

// Replaces variables not in `allowed` by random ground leaves.
Term restrict_vars(Rng& rng, Term t, const std::set<std::string>& allowed,
                   const std::vector<Term>& ground_leaves) {
  if (t.tag() == Tag::Var) {
    if (allowed.count(std::string(t.name()))) return t;
    return pick(rng, ground_leaves);
  }
  if (t.arity() == 0) return t;
  std::vector<Term> kids;
  for (Term c : t.children()) kids.push_back(restrict_vars(rng, c, allowed, ground_leaves));
  return make_term(t.tag(), std::string(t.name()), kids);
}

struct Vocabulary {
  std::vector<Term> ground_leaves;
  std::vector<Term> pattern_leaves;  // ground leaves plus x, y
  std::vector<Tag> ctors;
  std::vector<std::string> primitives;
  Universe universe;
  int depth = 0;
};

Vocabulary random_vocabulary(Rng& rng, int max_atoms, int max_prims, int max_depth,
                             std::size_t cap, const std::vector<std::string>& identities) {
  Vocabulary v;
  int n_atoms = uniform(rng, 1, max_atoms);
  for (int i = 1; i <= n_atoms; ++i) v.ground_leaves.push_back(atom("k" + std::to_string(i)));
  v.primitives = pick_primitives(rng, max_prims);
  if (std::find(v.primitives.begin(), v.primitives.end(), "n") != v.primitives.end()) {
    for (const auto& id : identities) v.ground_leaves.push_back(identity(id));
  }
  std::set<Tag> ctors = primitive_constructors(v.primitives);
  // Protocol rules may use one constructor Oscar cannot build himself.
  if (chance(rng, 0.5)) {
    static const std::vector<Tag> extra{Tag::Pair, Tag::Hash, Tag::Enc, Tag::Sig};
    ctors.insert(pick(rng, extra));
  }
  v.ctors.assign(ctors.begin(), ctors.end());
  v.pattern_leaves = v.ground_leaves;
  v.pattern_leaves.push_back(var("x"));
  v.pattern_leaves.push_back(var("y"));

  TermSet atoms(v.ground_leaves.begin(), v.ground_leaves.end());
  for (v.depth = max_depth; v.depth >= 1; --v.depth) {
    try {
      v.universe = Universe::enumerate(atoms, ctors, v.depth, cap);
      return v;
    } catch (const ResourceError&) {
    }
  }
  v.depth = 0;
  v.universe = Universe::enumerate(atoms, ctors, 0, cap);
  return v;
}

std::vector<Term> random_members(Rng& rng, const Universe& u, int count, int max_depth) {
  std::vector<Term> shallow;
  for (Term t : u.terms()) {
    if (t.depth() <= max_depth) shallow.push_back(t);
  }
  std::vector<Term> out;
  for (int i = 0; i < count && !shallow.empty(); ++i) out.push_back(pick(rng, shallow));
  return out;
}

// Premises over x, y; conclusion only mentions variables bound by premises.
std::pair<std::vector<Term>, Term> random_rule_shape(Rng& rng, const Vocabulary& v) {
  std::vector<Term> premises;
  int n = chance(rng, 0.15) ? 0 : uniform(rng, 1, 2);
  for (int i = 0; i < n; ++i) premises.push_back(random_pattern(rng, v.pattern_leaves, v.ctors, 2));
  std::set<std::string> bound;
  for (Term p : premises) {
    auto vs = variables(p);
    bound.insert(vs.begin(), vs.end());
  }
  Term conclusion = random_pattern(rng, v.pattern_leaves, v.ctors, 2);
  conclusion = restrict_vars(rng, conclusion, bound, v.ground_leaves);
  return {premises, conclusion};
}

}  // namespace

std::string RandomProtocol::describe() const {
  std::ostringstream os;
  os << "seed " << seed << ", depth " << depth << ", |U| " << universe.size() << ", primitives";
  for (const auto& p : problem.enabled) os << ' ' << p;
  os << "\n  X0:";
  for (Term t : problem.initial) os << ' ' << to_sexpr(t);
  for (const auto& r : problem.protocol) {
    os << "\n  " << r.id << ": {";
    for (std::size_t i = 0; i < r.premises.size(); ++i) {
      os << (i ? ", " : "") << to_sexpr(r.premises[i]);
    }
    os << "} -> " << to_sexpr(r.conclusion);
  }
  return os.str();
}

RandomProtocol random_protocol(std::uint64_t seed, const RandomProtocolOptions& options) {
  Rng rng(seed);
  RandomProtocol out;
  out.seed = seed;
  auto v = random_vocabulary(rng, options.max_atoms, 3, options.max_depth, options.universe_cap,
                             {std::string(kOscar)});
  out.depth = v.depth;
  auto x0 = random_members(rng, v.universe, uniform(rng, 1, 3), std::min(2, v.depth));

  std::vector<ProjectedRule> protocol;
  int families = uniform(rng, 1, options.max_families);
  for (int i = 1; i <= families; ++i) {
    auto [premises, conclusion] = random_rule_shape(rng, v);
    ProjectedRule r;
    r.id = "p" + std::to_string(i);
    r.premises = std::move(premises);
    r.conclusion = conclusion;
    r.origin = "h";
    r.kind = RuleKind::Protocol;
    protocol.push_back(std::move(r));
  }
  out.problem = make_problem(TermSet(x0.begin(), x0.end()), std::move(protocol), v.primitives);
  out.universe = std::move(v.universe);
  return out;
}

OracleComparison compare_with_oracle(const Problem& problem, const Universe& universe,
                                     int synthesis_depth, AnalyzerOptions options) {
  auto naive = std::async(std::launch::async, [&] {
    return saturate_naive(problem.initial, problem.all_rules(), universe);
  });
  Bounds b;
  b.max_rounds = 1 << 20;
  b.max_synthesis_depth = synthesis_depth;
  b.universe_cap = universe.size();
  Analyzer a(problem, universe, b, options);
  a.run();
  TermSet oracle = naive.get();

  OracleComparison c;
  c.engine_fixpoint = a.stats().fixpoint;
  c.pruning_checks = a.stats().pruning_checks;
  c.pruning_violations = a.stats().pruning_violations;
  for (Term t : universe.terms()) {
    ++c.compared;
    bool e = a.derivable(t);
    bool o = oracle.count(t) > 0;
    if (e && o) ++c.attacks;
    if (e && !o) c.engine_only.push_back(t);
    if (o && !e) c.oracle_only.push_back(t);
  }
  return c;
}

RandomInstance random_omniscient_instance(std::uint64_t seed) {
  Rng rng(seed);
  RandomInstance inst;
  inst.seed = seed;
  auto v = random_vocabulary(rng, 3, 3, 2, 3'000, {"o", "h"});
  inst.universe = v.universe;

  const Principal oscar{"o", PrincipalKind::Adversary};
  const Principal honest{"h", PrincipalKind::Honest};
  inst.principals = {honest, oscar};
  for (const auto& p : v.primitives) inst.principals.push_back({p, PrincipalKind::Primitive});

  KnowledgeState k0;
  for (Term t : random_members(rng, v.universe, uniform(rng, 1, 3), std::min(1, v.depth))) {
    k0.add(oscar.name, t);
  }
  inst.k0 = saturate_honest(k0, inst.principals, v.universe.terms(), {});

  for (const auto& p : v.primitives) {
    auto rs = primitive_rules(p, {oscar, honest});
    inst.rules.insert(inst.rules.end(), rs.begin(), rs.end());
  }
  int families = uniform(rng, 1, 3);
  for (int i = 1; i <= families; ++i) {
    auto [premises, taught] = random_rule_shape(rng, v);
    PatternRule r;
    r.id = "p" + std::to_string(i);
    r.teller = honest;
    r.learner = oscar;
    r.taught = taught;
    r.premises = premises;
    for (Term p : premises) {
      auto vs = variables(p);
      r.quantified_vars.insert(vs.begin(), vs.end());
    }
    inst.rules.push_back(std::move(r));
  }
  return inst;
}

RandomInstance random_multi_adversary_instance(std::uint64_t seed) {
  Rng rng(seed);
  RandomInstance inst;
  inst.seed = seed;
  auto v = random_vocabulary(rng, 3, 3, 2, 3'000, {"o1", "o2", "o3"});
  inst.universe = v.universe;

  const Principal honest{"h", PrincipalKind::Honest};
  std::vector<Principal> adversaries{
      {"o1", PrincipalKind::Adversary}, {"o2", PrincipalKind::Adversary}, {"o3", PrincipalKind::Adversary}};
  inst.principals = {honest};
  inst.principals.insert(inst.principals.end(), adversaries.begin(), adversaries.end());
  for (const auto& p : v.primitives) inst.principals.push_back({p, PrincipalKind::Primitive});

  KnowledgeState k0;
  for (const auto& a : adversaries) {
    for (Term t : random_members(rng, v.universe, uniform(rng, 0, 2), std::min(2, v.depth))) {
      k0.add(a.name, t);
    }
  }
  inst.k0 = saturate_honest(k0, inst.principals, v.universe.terms(), {});

  for (const auto& p : v.primitives) {
    auto rs = primitive_rules(p, adversaries);
    inst.rules.insert(inst.rules.end(), rs.begin(), rs.end());
  }
  int families = uniform(rng, 1, 4);
  for (int i = 1; i <= families; ++i) {
    auto [premises, taught] = random_rule_shape(rng, v);
    PatternRule r;
    r.id = "p" + std::to_string(i);
    // Mix honest-to-adversary flows with flows between adversaries.
    const Principal& learner = pick(rng, adversaries);
    if (chance(rng, 0.5)) {
      r.teller = honest;
    } else {
      do {
        r.teller = pick(rng, adversaries);
      } while (r.teller == learner);
    }
    r.learner = learner;
    r.taught = taught;
    r.premises = premises;
    for (Term p : premises) {
      auto vs = variables(p);
      r.quantified_vars.insert(vs.begin(), vs.end());
    }
    inst.rules.push_back(std::move(r));
  }
  return inst;
}

}  // namespace kflow
