// Naive ground saturation: f over full knowledge states and g over Oscar's
// projection. Deliberately independent of the two-phase engine.

#include <algorithm>

#include "kflow/engine.hpp"
#include "kflow/error.hpp"

namespace kflow {

namespace {

std::set<std::string> premise_variables(const std::vector<Term>& premises) {
  std::set<std::string> out;
  for (Term p : premises) {
    auto v = variables(p);
    out.insert(v.begin(), v.end());
  }
  return out;
}

}  // namespace

KnowledgeState f_step(const KnowledgeState& k, const std::vector<PatternRule>& rules,
                      const Universe& universe) {
  KnowledgeState out = k;
  for (const auto& r : rules) {
    if (r.teller == r.learner) continue;
    auto learner_terms = k.known_by(r.learner.name);
    TermHashSet learner_set(learner_terms.begin(), learner_terms.end());
    auto teller_terms = k.known_by(r.teller.name);
    TermHashSet teller_set(teller_terms.begin(), teller_terms.end());
    auto tell = [&](Term v) {
      if (universe.contains(v) && teller_set.count(v)) out.add(r.learner.name, v);
    };
    auto pv = premise_variables(r.premises);
    auto tv = variables(r.taught);
    if (r.taught.tag() != Tag::Var && std::includes(tv.begin(), tv.end(), pv.begin(), pv.end())) {
      // Match the taught pattern against what the teller knows, then test premises.
      for (Term t : teller_terms) {
        if (!universe.contains(t) || learner_set.count(t)) continue;
        for (const auto& s : match_all(r.taught, t)) {
          if (!guards_hold(r.guards, s)) continue;
          bool ok = std::all_of(r.premises.begin(), r.premises.end(),
                                [&](Term p) { return learner_set.count(instantiate(p, s)) > 0; });
          if (ok) {
            out.add(r.learner.name, t);
            break;
          }
        }
      }
      continue;
    }
    join_premises(
        r.premises, learner_terms, [&](Term t) { return learner_set.count(t) > 0; },
        Substitution{}, [&](const Substitution& s) {
          if (!guards_hold(r.guards, s)) return true;
          if (auto v = try_instantiate(r.taught, s)) {
            tell(*v);
          } else {
            for (Term t : teller_terms) {
              for (const auto& full : match_all(r.taught, t, s)) {
                if (guards_hold(r.guards, full)) tell(t);
              }
            }
          }
          return true;
        });
  }
  return out;
}

KnowledgeState f_star(const KnowledgeState& k0, const std::vector<PatternRule>& rules,
                      const Universe& universe, int* steps) {
  KnowledgeState k = k0;
  int n = 0;
  for (;;) {
    KnowledgeState next = f_step(k, rules, universe);
    if (next.size() == k.size()) break;
    k = std::move(next);
    ++n;
  }
  if (steps) *steps = n;
  return k;
}

TermSet g_step(const TermSet& x, const std::vector<ProjectedRule>& rules, const Universe& universe) {
  TermSet out = x;
  std::vector<Term> xs(x.begin(), x.end());
  TermHashSet xh(x.begin(), x.end());
  auto in_x = [&](Term t) { return xh.count(t) > 0; };

  for (const auto& r : rules) {
    auto pv = premise_variables(r.premises);
    auto cv = variables(r.conclusion);
    bool conclusion_binds_all = r.conclusion.tag() != Tag::Var &&
                                std::includes(cv.begin(), cv.end(), pv.begin(), pv.end());
    if (conclusion_binds_all) {
      // Enumerate candidate conclusions from the universe, then test premises.
      for (Term u : universe.terms()) {
        if (out.count(u)) continue;
        for (const auto& s : match_all(r.conclusion, u)) {
          if (!guards_hold(r.guards, s)) continue;
          bool ok = true;
          for (Term p : r.premises) {
            if (!in_x(instantiate(p, s))) {
              ok = false;
              break;
            }
          }
          if (ok) {
            out.insert(u);
            break;
          }
        }
      }
      continue;
    }
    join_premises(r.premises, xs, in_x, Substitution{}, [&](const Substitution& s) {
      if (!guards_hold(r.guards, s)) return true;
      if (auto c = try_instantiate(r.conclusion, s)) {
        if (universe.contains(*c)) out.insert(*c);
      } else {
        for (Term u : universe.terms()) {
          for (const auto& full : match_all(r.conclusion, u, s)) {
            if (guards_hold(r.guards, full)) out.insert(u);
          }
        }
      }
      return true;
    });
  }
  return out;
}

TermSet saturate_naive(const TermSet& x0, const std::vector<ProjectedRule>& rules,
                       const Universe& universe, std::size_t cap) {
  TermSet x = x0;
  for (;;) {
    TermSet next = g_step(x, rules, universe);
    if (next.size() > cap) {
      throw ResourceError("naive saturation exceeds cap of " + std::to_string(cap) + " values",
                          next.size());
    }
    if (next.size() == x.size()) return x;
    x = std::move(next);
  }
}

TermSet saturate_naive(const TermSet& x0, const std::vector<ProjectedRule>& rules,
                       const Bounds& bounds) {
  TermSet atoms;
  std::set<Tag> ctors;
  auto absorb = [&](Term t) {
    for (Term l : leaves(t)) atoms.insert(l);
    for (Tag c : constructors(t)) ctors.insert(c);
  };
  for (Term t : x0) {
    for (Term l : leaves(t)) atoms.insert(l);
  }
  for (const auto& r : rules) {
    absorb(r.conclusion);
    for (Term p : r.premises) absorb(p);
  }
  auto enumerated = enumerate_universe(atoms, ctors, bounds.max_term_depth, bounds.universe_cap);
  enumerated.insert(enumerated.end(), x0.begin(), x0.end());
  auto universe = Universe::closure_of(enumerated, bounds.universe_cap);
  return saturate_naive(x0, rules, universe, bounds.universe_cap);
}

}  // namespace kflow
