#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kflow/principal.hpp"
#include "kflow/term.hpp"

namespace kflow {

using Substitution = std::map<std::string, Term>;

// Pattern variable `var` must not be bound to a term with constructor `excluded`.
// Used to keep symmetric-key rules away from public keys.
struct Guard {
  std::string var;
  Tag excluded;
  friend bool operator==(const Guard&, const Guard&) = default;
};

bool guards_hold(const std::vector<Guard>& guards, const Substitution& subst);

enum class RuleKind { Composing, Decomposing, Protocol };
std::string_view rule_kind_name(RuleKind k);

// A communication rule (teller, taught, learner, premises): the teller tells
// `taught` to the learner once the learner knows every premise.
struct PatternRule {
  std::string id;
  Principal teller;
  Term taught;
  Principal learner;
  std::vector<Term> premises;
  std::set<std::string> quantified_vars;
  // Role-variable bindings this rule was expanded from (for reporting only).
  std::map<std::string, std::string> roles;
  RuleKind kind = RuleKind::Protocol;
  std::optional<std::size_t> controlling;
  std::vector<Guard> guards;
};

// X ->_p x as seen by the merged adversary.
struct ProjectedRule {
  std::string id;
  std::vector<Term> premises;
  Term conclusion;
  std::string origin;
  RuleKind kind = RuleKind::Protocol;
  // Index into `premises` of the controlling value for decomposing rules.
  std::optional<std::size_t> controlling;
  std::vector<Guard> guards;
  std::map<std::string, std::string> roles;
};

// One-way syntactic matching. Set2 patterns match in either child order, so
// match_all can yield two substitutions; match returns the first.
std::vector<Substitution> match_all(Term pattern, Term ground, const Substitution& partial = {});
std::optional<Substitution> match(Term pattern, Term ground, const Substitution& partial = {});

// Throws ConstructionError if a variable of `pattern` is not covered.
Term instantiate(Term pattern, const Substitution& subst);
// Like instantiate but returns an empty optional for uncovered variables.
std::optional<Term> try_instantiate(Term pattern, const Substitution& subst);

std::optional<ProjectedRule> project(const PatternRule& rule, std::string_view oscar = kOscar);

// Every ground instance of `rule` whose premises and conclusion lie in `universe`.
struct RuleInstance {
  const ProjectedRule* rule;
  Substitution subst;
  std::vector<Term> premises;
  Term conclusion;
};
std::vector<RuleInstance> ground_instances(const ProjectedRule& rule,
                                           const std::vector<Term>& universe);

struct FixedSet;
// Ground instances over `universe` that mention no fixed-set member. Oscar
// owns no fixed set, so any fixed value in an Oscar-facing rule is held by a
// non-owner.
std::vector<RuleInstance> restrict_rf(const std::vector<ProjectedRule>& rules,
                                      const std::vector<FixedSet>& fixed,
                                      const std::vector<Term>& universe);

// Enumerates substitutions making every premise an element of `candidates`
// (a sorted canonical vector) extending `start`. Ground premises are tested
// against `contains`. The callback returns false to stop early.
template <typename Contains, typename Callback>
bool join_premises(const std::vector<Term>& premises, const std::vector<Term>& candidates,
                   Contains&& contains, const Substitution& start, Callback&& cb);

}  // namespace kflow

#include "kflow/rules_join.ipp"
