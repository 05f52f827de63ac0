#include "kflow/engine.hpp"

#include <algorithm>
#include <climits>

#include "kflow/error.hpp"
#include "kflow/primitives.hpp"

namespace kflow {

std::vector<ProjectedRule> Problem::composing() const {
  std::vector<ProjectedRule> out;
  for (const auto& r : primitives) {
    if (r.kind == RuleKind::Composing) out.push_back(r);
  }
  return out;
}

std::vector<ProjectedRule> Problem::decomposing() const {
  std::vector<ProjectedRule> out;
  for (const auto& r : primitives) {
    if (r.kind == RuleKind::Decomposing) out.push_back(r);
  }
  return out;
}

std::vector<ProjectedRule> Problem::all_rules() const {
  std::vector<ProjectedRule> out = protocol;
  out.insert(out.end(), primitives.begin(), primitives.end());
  return out;
}

const ProjectedRule* Problem::find_rule(const std::string& id,
                                        const std::map<std::string, std::string>& roles) const {
  for (const auto& r : protocol) {
    if (r.id == id && r.roles == roles) return &r;
  }
  for (const auto& r : primitives) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

Problem make_problem(TermSet initial, std::vector<ProjectedRule> protocol,
                     const std::vector<std::string>& enabled) {
  Problem p;
  p.initial = std::move(initial);
  p.protocol = std::move(protocol);
  p.primitives = oscar_rules(enabled);
  p.enabled = enabled;
  return p;
}

std::string_view step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::Initial: return "initial";
    case StepKind::Compose: return "compose";
    case StepKind::Decompose: return "decompose";
    case StepKind::ProtocolRule: return "protocol";
  }
  return "?";
}

std::string_view status_name(Status s) {
  return s == Status::AttackFound ? "attack-found" : "secure-at-bound";
}

// ---- relevant universe ----------------------------------------------------

namespace {

// Deepest level (root = 0) at which each variable occurs in `t`.
void var_levels(Term t, int level, std::map<std::string, int>& out) {
  if (t.tag() == Tag::Var) {
    auto& slot = out.try_emplace(std::string(t.name()), level).first->second;
    slot = std::max(slot, level);
    return;
  }
  for (Term c : t.children()) var_levels(c, level + 1, out);
}

void add_closure(Term t, TermSet& all, std::size_t cap, bool& changed) {
  if (!all.insert(t).second) return;
  changed = true;
  if (all.size() > cap) {
    throw ResourceError("universe exceeds cap of " + std::to_string(cap) + " terms", all.size());
  }
  for (Term c : t.children()) add_closure(c, all, cap, changed);
}

}  // namespace

Universe relevant_universe(const Problem& problem, const std::vector<Term>& targets,
                           const Bounds& bounds) {
  const int depth = bounds.max_term_depth;
  TermSet all;
  bool changed = false;
  for (Term t : problem.initial) add_closure(t, all, bounds.universe_cap, changed);
  for (Term t : targets) add_closure(t, all, bounds.universe_cap, changed);
  for (const auto& r : problem.protocol) {
    if (!r.premises.empty()) continue;
    if (auto c = try_instantiate(r.conclusion, {}); c && c->depth() <= depth) {
      add_closure(*c, all, bounds.universe_cap, changed);
    }
  }

  do {
    changed = false;
    const std::vector<Term> snapshot(all.begin(), all.end());
    for (const auto& r : problem.protocol) {
      if (r.premises.empty()) continue;
      std::map<std::string, int> levels;
      for (Term p : r.premises) var_levels(p, 0, levels);
      var_levels(r.conclusion, 0, levels);

      std::vector<std::string> names;
      std::vector<std::vector<Term>> choices;
      for (const auto& [v, level] : levels) {
        names.push_back(v);
        auto& c = choices.emplace_back();
        for (Term t : snapshot) {
          if (t.depth() <= depth - level) c.push_back(t);
        }
      }

      std::vector<std::size_t> idx(names.size(), 0);
      bool empty = std::any_of(choices.begin(), choices.end(),
                               [](const auto& c) { return c.empty(); });
      while (!empty) {
        Substitution s;
        for (std::size_t i = 0; i < names.size(); ++i) s[names[i]] = choices[i][idx[i]];
        if (guards_hold(r.guards, s)) {
          std::vector<Term> inst;
          bool fits = true;
          for (Term p : r.premises) inst.push_back(instantiate(p, s));
          inst.push_back(instantiate(r.conclusion, s));
          for (Term t : inst) fits = fits && t.depth() <= depth;
          if (fits) {
            for (Term t : inst) add_closure(t, all, bounds.universe_cap, changed);
          }
        }
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == choices[i].size()) idx[i++] = 0;
        if (i == idx.size()) break;
      }
    }
  } while (changed);

  return Universe::closure_of(std::vector<Term>(all.begin(), all.end()), bounds.universe_cap);
}

// ---- analyzer -------------------------------------------------------------

Analyzer::Analyzer(const Problem& problem, const Universe& universe, Bounds bounds,
                   AnalyzerOptions options)
    : problem_(problem),
      universe_(universe),
      bounds_(bounds),
      options_(options),
      composing_(problem.composing()),
      decomposing_(problem.decomposing()) {
  if (options_.misclassify) {
    for (auto r : decomposing_) {
      r.kind = RuleKind::Composing;
      r.controlling.reset();
      composing_.push_back(std::move(r));
    }
    decomposing_.clear();
  }
  stats_.universe_size = universe.size();
}

bool Analyzer::add(Term t, DerivationProof proof) {
  if (!proofs_.emplace(t, std::move(proof)).second) return false;
  analyzed_order_.push_back(t);
  memo_.clear();
  ++memo_generation_;
  return true;
}

void Analyzer::run() {
  for (Term t : problem_.initial) {
    auto node = std::make_shared<ProofNode>();
    node->kind = StepKind::Initial;
    node->conclusion = t;
    add(t, node);
  }
  // Messages a protocol sends unprompted are known to Oscar from the start.
  for (const auto& r : problem_.protocol) {
    if (!r.premises.empty()) continue;
    auto c = try_instantiate(r.conclusion, {});
    if (!c || !universe_.contains(*c)) continue;
    auto node = std::make_shared<ProofNode>();
    node->kind = StepKind::Initial;
    node->rule = r.id;
    node->roles = r.roles;
    node->conclusion = *c;
    add(*c, node);
  }
  decompose_closure();
  for (int round = 1; round <= bounds_.max_rounds; ++round) {
    compute_pool();
    if (!fire_protocol()) {
      stats_.fixpoint = true;
      break;
    }
    stats_.rounds = round;
    decompose_closure();
  }
  compute_pool();
  if (options_.instrument) check_pruning();
  stats_.analyzed_size = analyzed_order_.size();
  stats_.synthesizable_size = pool_.size();
}

void Analyzer::decompose_closure() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < analyzed_order_.size(); ++i) {
      Term a = analyzed_order_[i];
      for (const auto& r : decomposing_) {
        const std::size_t ctrl = r.controlling.value_or(0);
        for (const auto& s : match_all(r.premises[ctrl], a)) {
          if (!guards_hold(r.guards, s)) continue;
          auto c = try_instantiate(r.conclusion, s);
          if (!c || proofs_.count(*c) || !universe_.contains(*c)) continue;
          std::vector<DerivationProof> premises;
          bool ok = true;
          for (std::size_t j = 0; j < r.premises.size() && ok; ++j) {
            if (j == ctrl) {
              premises.push_back(proofs_.at(a));
              continue;
            }
            auto side = try_instantiate(r.premises[j], s);
            DerivationProof p = side ? synth(*side, bounds_.max_synthesis_depth) : nullptr;
            ok = p != nullptr;
            premises.push_back(std::move(p));
          }
          if (!ok) continue;
          auto node = std::make_shared<ProofNode>();
          node->kind = StepKind::Decompose;
          node->rule = r.id;
          node->subst = s;
          node->premises = std::move(premises);
          node->conclusion = *c;
          add(*c, node);
          ++stats_.decompositions;
          changed = true;
        }
      }
    }
  }
}

DerivationProof Analyzer::synth(Term t, int depth) {
  if (auto it = proofs_.find(t); it != proofs_.end()) return it->second;
  if (depth <= 0 || !universe_.contains(t)) return nullptr;
  auto key = std::make_pair(t, depth);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  memo_[key] = nullptr;  // cuts cycles through the same goal
  for (const auto& r : composing_) {
    for (const auto& s : match_all(r.conclusion, t)) {
      if (!guards_hold(r.guards, s)) continue;
      std::vector<DerivationProof> premises;
      bool ok = true;
      for (Term p : r.premises) {
        auto g = try_instantiate(p, s);
        DerivationProof sub = g ? synth(*g, depth - 1) : nullptr;
        if (!sub) {
          ok = false;
          break;
        }
        premises.push_back(std::move(sub));
      }
      if (!ok) continue;
      auto node = std::make_shared<ProofNode>();
      node->kind = StepKind::Compose;
      node->rule = r.id;
      node->subst = s;
      node->premises = std::move(premises);
      node->conclusion = t;
      memo_[key] = node;
      return node;
    }
  }
  return nullptr;
}

void Analyzer::compute_pool() {
  pool_.clear();
  height_.clear();
  for (Term t : analyzed_order_) {
    pool_.insert(t);
    height_[t] = 0;
  }
  for (Term t : universe_.by_depth()) {
    if (pool_.count(t)) continue;
    int best = INT_MAX;
    for (const auto& r : composing_) {
      for (const auto& s : match_all(r.conclusion, t)) {
        if (!guards_hold(r.guards, s)) continue;
        int h = 0;
        bool ok = true;
        for (Term p : r.premises) {
          auto g = try_instantiate(p, s);
          if (!g || !pool_.count(*g)) {
            ok = false;
            break;
          }
          h = std::max(h, height_.at(*g));
        }
        if (ok) best = std::min(best, h + 1);
      }
    }
    if (best <= bounds_.max_synthesis_depth) {
      pool_.insert(t);
      height_[t] = best;
    }
  }
}

bool Analyzer::fire_protocol() {
  std::vector<Term> pool_terms(pool_.begin(), pool_.end());
  std::sort(pool_terms.begin(), pool_terms.end());
  std::vector<std::pair<Term, DerivationProof>> fresh;
  TermHashSet seen;
  auto in_pool = [&](Term t) { return pool_.count(t) > 0; };

  for (const auto& r : problem_.protocol) {
    if (r.premises.empty()) continue;
    join_premises(r.premises, pool_terms, in_pool, Substitution{}, [&](const Substitution& s) {
      if (!guards_hold(r.guards, s)) return true;
      auto c = try_instantiate(r.conclusion, s);
      if (!c || !universe_.contains(*c) || proofs_.count(*c) || seen.count(*c)) return true;
      std::vector<DerivationProof> premises;
      for (Term p : r.premises) {
        auto sub = synth(instantiate(p, s), bounds_.max_synthesis_depth);
        if (!sub) return true;
        premises.push_back(std::move(sub));
      }
      auto node = std::make_shared<ProofNode>();
      node->kind = StepKind::ProtocolRule;
      node->rule = r.id;
      node->roles = r.roles;
      node->subst = s;
      node->premises = std::move(premises);
      node->conclusion = *c;
      fresh.emplace_back(*c, node);
      seen.insert(*c);
      ++stats_.protocol_firings;
      return true;
    });
  }
  for (auto& [t, proof] : fresh) add(t, std::move(proof));
  return !fresh.empty();
}

void Analyzer::check_pruning() {
  std::vector<Term> composed;
  for (Term t : pool_) {
    if (!proofs_.count(t)) composed.push_back(t);
  }
  std::sort(composed.begin(), composed.end());
  for (Term t : composed) {
    for (const auto& r : problem_.decomposing()) {
      const std::size_t ctrl = r.controlling.value_or(0);
      for (const auto& s : match_all(r.premises[ctrl], t)) {
        if (!guards_hold(r.guards, s)) continue;
        auto c = try_instantiate(r.conclusion, s);
        if (!c) continue;
        bool sides = true;
        for (std::size_t j = 0; j < r.premises.size(); ++j) {
          if (j == ctrl) continue;
          auto side = try_instantiate(r.premises[j], s);
          sides = sides && side && pool_.count(*side);
        }
        if (!sides) continue;
        ++stats_.pruning_checks;
        if (!pool_.count(*c)) {
          ++stats_.pruning_violations;
          pruning_log_.push_back(r.id + " on " + to_sexpr(t) + " yields " + to_sexpr(*c));
        }
      }
    }
  }
}

std::vector<Term> Analyzer::derivable_terms() const {
  std::vector<Term> out(pool_.begin(), pool_.end());
  std::sort(out.begin(), out.end());
  return out;
}

DerivationProof Analyzer::prove(Term t) {
  if (!derivable(t)) return nullptr;
  return synth(t, bounds_.max_synthesis_depth);
}

// ---- free functions ---------------------------------------------------------

TermSet analyze(const TermSet& x0, const std::vector<ProjectedRule>& decomposing,
                const std::vector<ProjectedRule>& composing, const Universe& universe,
                const Bounds& bounds) {
  Problem p;
  p.initial = x0;
  p.primitives = decomposing;
  p.primitives.insert(p.primitives.end(), composing.begin(), composing.end());
  Bounds b = bounds;
  b.max_rounds = 0;
  Analyzer a(p, universe, b);
  a.run();
  return TermSet(a.analyzed().begin(), a.analyzed().end());
}

namespace {

struct Synthesizer {
  const TermSet& analyzed;
  const std::vector<ProjectedRule>& composing;
  std::map<std::pair<Term, int>, DerivationProof> memo;

  DerivationProof run(Term t, int depth) {
    if (analyzed.count(t)) {
      auto leaf = std::make_shared<ProofNode>();
      leaf->kind = StepKind::Initial;
      leaf->conclusion = t;
      return leaf;
    }
    if (depth <= 0) return nullptr;
    auto key = std::make_pair(t, depth);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    memo[key] = nullptr;
    for (const auto& r : composing) {
      for (const auto& s : match_all(r.conclusion, t)) {
        if (!guards_hold(r.guards, s)) continue;
        std::vector<DerivationProof> premises;
        for (Term p : r.premises) {
          auto g = try_instantiate(p, s);
          auto sub = g ? run(*g, depth - 1) : nullptr;
          if (!sub) break;
          premises.push_back(std::move(sub));
        }
        if (premises.size() != r.premises.size()) continue;
        auto node = std::make_shared<ProofNode>();
        node->kind = StepKind::Compose;
        node->rule = r.id;
        node->subst = s;
        node->premises = std::move(premises);
        node->conclusion = t;
        return memo[key] = node;
      }
    }
    return nullptr;
  }
};

void check_target_atoms(const std::vector<Term>& targets, const Problem& problem) {
  TermSet known;
  auto absorb = [&](Term t) {
    for (Term l : leaves(t)) known.insert(l);
  };
  for (Term t : problem.initial) absorb(t);
  for (const auto& r : problem.all_rules()) {
    absorb(r.conclusion);
    for (Term p : r.premises) absorb(p);
  }
  for (Term t : targets) {
    if (!t) throw ValidationError("empty target");
    if (!t.ground()) throw ValidationError("target is not ground: " + to_sexpr(t));
    for (Term l : leaves(t)) {
      if (!known.count(l)) {
        throw ValidationError("target " + to_sexpr(t) + " uses unknown value " + to_sexpr(l));
      }
    }
  }
}

}  // namespace

DerivationProof synthesize(Term target, const TermSet& analyzed,
                           const std::vector<ProjectedRule>& composing, int depth) {
  Synthesizer s{analyzed, composing, {}};
  return s.run(target, depth);
}

Verdict check_targets(const std::vector<Term>& targets, const Problem& problem,
                      const Bounds& bounds, AnalyzerOptions options) {
  if (targets.empty()) throw ValidationError("no targets to check");
  check_target_atoms(targets, problem);
  Universe universe = relevant_universe(problem, targets, bounds);
  Analyzer a(problem, universe, bounds, options);
  a.run();
  Verdict v;
  v.bounds = bounds;
  v.target = targets.front();
  for (Term t : targets) {
    if (a.derivable(t)) {
      v.status = Status::AttackFound;
      v.target = t;
      v.proof = a.prove(t);
      break;
    }
  }
  v.stats = a.stats();
  return v;
}

Verdict derivable(Term target, const Problem& problem, const Bounds& bounds,
                  AnalyzerOptions options) {
  return check_targets({target}, problem, bounds, options);
}

}  // namespace kflow
