#include "kflow/rules.hpp"

#include <unordered_set>

#include "kflow/error.hpp"
#include "kflow/knowledge.hpp"

namespace kflow {

std::string_view rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::Composing:
      return "composing";
    case RuleKind::Decomposing:
      return "decomposing";
    case RuleKind::Protocol:
      return "protocol";
  }
  return "?";
}

bool guards_hold(const std::vector<Guard>& guards, const Substitution& subst) {
  for (const auto& g : guards) {
    auto it = subst.find(g.var);
    if (it != subst.end() && it->second.tag() == g.excluded) return false;
  }
  return true;
}

namespace {

void match_into(Term pattern, Term ground, Substitution subst, std::vector<Substitution>& out) {
  if (pattern.ground()) {
    if (pattern == ground) out.push_back(std::move(subst));
    return;
  }
  if (pattern.tag() == Tag::Var) {
    auto [it, inserted] = subst.emplace(pattern.name(), ground);
    if (inserted || it->second == ground) out.push_back(std::move(subst));
    return;
  }
  if (pattern.tag() != ground.tag()) return;

  auto match_seq = [&](Term p0, Term p1, Term g0, Term g1) {
    std::vector<Substitution> first;
    match_into(p0, g0, subst, first);
    for (auto& s : first) match_into(p1, g1, std::move(s), out);
  };
  if (pattern.arity() == 1) {
    match_into(pattern.child(0), ground.child(0), std::move(subst), out);
  } else if (pattern.tag() == Tag::Set2) {
    std::size_t before = out.size();
    match_seq(pattern.child(0), pattern.child(1), ground.child(0), ground.child(1));
    std::vector<Substitution> swapped;
    {
      std::vector<Substitution> first;
      match_into(pattern.child(0), ground.child(1), subst, first);
      for (auto& s : first) match_into(pattern.child(1), ground.child(0), std::move(s), swapped);
    }
    for (auto& s : swapped) {
      bool dup = false;
      for (std::size_t i = before; i < out.size(); ++i) {
        if (out[i] == s) dup = true;
      }
      if (!dup) out.push_back(std::move(s));
    }
  } else {
    match_seq(pattern.child(0), pattern.child(1), ground.child(0), ground.child(1));
  }
}

}  // namespace

std::vector<Substitution> match_all(Term pattern, Term ground, const Substitution& partial) {
  std::vector<Substitution> out;
  if (!ground.ground()) return out;
  match_into(pattern, ground, partial, out);
  return out;
}

std::optional<Substitution> match(Term pattern, Term ground, const Substitution& partial) {
  auto all = match_all(pattern, ground, partial);
  if (all.empty()) return std::nullopt;
  return std::move(all.front());
}

std::optional<Term> try_instantiate(Term pattern, const Substitution& subst) {
  if (pattern.ground()) return pattern;
  if (pattern.tag() == Tag::Var) {
    auto it = subst.find(pattern.name());
    if (it == subst.end()) return std::nullopt;
    return it->second;
  }
  std::vector<Term> kids;
  for (Term c : pattern.children()) {
    auto k = try_instantiate(c, subst);
    if (!k) return std::nullopt;
    kids.push_back(*k);
  }
  return make_term(pattern.tag(), {}, kids);
}

Term instantiate(Term pattern, const Substitution& subst) {
  auto t = try_instantiate(pattern, subst);
  if (!t) {
    std::string missing;
    for (const auto& v : variables(pattern)) {
      if (!subst.count(v)) missing += (missing.empty() ? "" : ", ") + v;
    }
    throw ConstructionError("uncovered variable(s) " + missing + " in " + to_sexpr(pattern));
  }
  return *t;
}

std::optional<ProjectedRule> project(const PatternRule& rule, std::string_view oscar) {
  if (rule.learner.name != oscar || rule.teller.name == oscar) return std::nullopt;
  ProjectedRule p;
  p.id = rule.id;
  p.premises = rule.premises;
  p.conclusion = rule.taught;
  p.origin = rule.teller.name;
  p.kind = rule.kind;
  p.controlling = rule.controlling;
  p.guards = rule.guards;
  p.roles = rule.roles;
  return p;
}

std::vector<RuleInstance> ground_instances(const ProjectedRule& rule,
                                           const std::vector<Term>& universe) {
  std::unordered_set<Term> in_universe(universe.begin(), universe.end());
  auto contains = [&](Term t) { return in_universe.count(t) > 0; };
  std::vector<RuleInstance> out;
  auto emit = [&](const Substitution& s) {
    if (!guards_hold(rule.guards, s)) return true;
    auto finish = [&](const Substitution& full) {
      Term c = instantiate(rule.conclusion, full);
      if (!contains(c)) return;
      RuleInstance inst{&rule, full, {}, c};
      for (Term p : rule.premises) inst.premises.push_back(instantiate(p, full));
      out.push_back(std::move(inst));
    };
    if (try_instantiate(rule.conclusion, s)) {
      finish(s);
    } else {
      for (Term u : universe) {
        for (const auto& full : match_all(rule.conclusion, u, s)) {
          if (guards_hold(rule.guards, full)) finish(full);
        }
      }
    }
    return true;
  };
  join_premises(rule.premises, universe, contains, Substitution{}, emit);
  return out;
}

std::vector<RuleInstance> restrict_rf(const std::vector<ProjectedRule>& rules,
                                      const std::vector<FixedSet>& fixed,
                                      const std::vector<Term>& universe) {
  TermHashSet banned;
  for (const auto& f : fixed) banned.insert(f.members.begin(), f.members.end());
  std::vector<RuleInstance> out;
  for (const auto& r : rules) {
    for (auto& inst : ground_instances(r, universe)) {
      bool clean = !banned.count(inst.conclusion);
      for (Term p : inst.premises) clean = clean && !banned.count(p);
      if (clean) out.push_back(std::move(inst));
    }
  }
  return out;
}

}  // namespace kflow
