#include "kflow/knowledge.hpp"

#include <algorithm>

#include "kflow/error.hpp"

namespace kflow {

std::string_view kind_name(PrincipalKind k) {
  switch (k) {
    case PrincipalKind::Honest:
      return "honest";
    case PrincipalKind::Adversary:
      return "adversary";
    case PrincipalKind::Primitive:
      return "primitive";
  }
  return "?";
}

bool kind_from_name(std::string_view s, PrincipalKind& out) {
  for (auto k : {PrincipalKind::Honest, PrincipalKind::Adversary, PrincipalKind::Primitive}) {
    if (kind_name(k) == s) {
      out = k;
      return true;
    }
  }
  return false;
}

KnowledgeState::KnowledgeState(std::initializer_list<Fact> facts) {
  for (const auto& f : facts) add(f.principal, f.term);
}

bool KnowledgeState::add(std::string principal, Term term) {
  if (!term || !term.ground()) {
    throw ConstructionError("knowledge facts must be ground terms");
  }
  return facts_.insert(Fact{std::move(principal), term}).second;
}

bool KnowledgeState::contains(std::string_view principal, Term term) const {
  return facts_.count(Fact{std::string(principal), term}) > 0;
}

std::vector<Term> KnowledgeState::known_by(std::string_view principal) const {
  std::vector<Term> out;
  auto it = facts_.lower_bound(Fact{std::string(principal), Term{}});
  for (; it != facts_.end() && it->principal == principal; ++it) out.push_back(it->term);
  return out;
}

std::set<std::string> KnowledgeState::principals() const {
  std::set<std::string> out;
  for (const auto& f : facts_) out.insert(f.principal);
  return out;
}

bool KnowledgeState::subset_of(const KnowledgeState& other) const {
  return std::includes(other.facts_.begin(), other.facts_.end(), facts_.begin(), facts_.end());
}

std::set<std::string> source(const KnowledgeState& k0, Term v) {
  std::set<std::string> out;
  for (const auto& f : k0.facts()) {
    if (f.term == v) out.insert(f.principal);
  }
  return out;
}

TermSet knowledge(const KnowledgeState& k) {
  TermSet out;
  for (const auto& f : k.facts()) out.insert(f.term);
  return out;
}

TermSet oscar_view(const KnowledgeState& k, std::string_view oscar) {
  auto v = k.known_by(oscar);
  return {v.begin(), v.end()};
}

std::pair<KnowledgeState, std::vector<PatternRule>> merge(const std::vector<Principal>& adversaries,
                                                          const KnowledgeState& k,
                                                          const std::vector<PatternRule>& rules) {
  if (adversaries.empty()) throw ValidationError("merge needs at least one adversary");
  std::set<std::string> names;
  for (const auto& a : adversaries) {
    if (a.kind == PrincipalKind::Primitive) {
      throw ValidationError("primitive principal '" + a.name + "' cannot be merged into Oscar");
    }
    names.insert(a.name);
  }
  auto rename = [&](const std::string& p) {
    return names.count(p) ? std::string(kOscar) : p;
  };
  auto rename_principal = [&](const Principal& p) {
    if (!names.count(p.name)) return p;
    return Principal{std::string(kOscar), PrincipalKind::Adversary};
  };

  KnowledgeState merged;
  for (const auto& f : k.facts()) merged.add(rename(f.principal), f.term);

  std::vector<PatternRule> out;
  for (const auto& r : rules) {
    PatternRule m = r;
    m.teller = rename_principal(r.teller);
    m.learner = rename_principal(r.learner);
    if (m.teller == m.learner) continue;
    out.push_back(std::move(m));
  }
  return {std::move(merged), std::move(out)};
}

KnowledgeState saturate_honest(const KnowledgeState& k0, const std::vector<Principal>& principals,
                               const std::vector<Term>& universe,
                               const std::vector<FixedSet>& fixed) {
  TermHashSet banned;
  for (const auto& f : fixed) banned.insert(f.members.begin(), f.members.end());
  KnowledgeState out = k0;
  for (const auto& p : principals) {
    if (p.kind == PrincipalKind::Adversary) continue;
    for (Term v : universe) {
      if (!banned.count(v)) out.add(p.name, v);
    }
  }
  return out;
}

}  // namespace kflow
