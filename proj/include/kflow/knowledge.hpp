#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kflow/principal.hpp"
#include "kflow/rules.hpp"
#include "kflow/term.hpp"

namespace kflow {

struct Fact {
  std::string principal;
  Term term;
  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

// A finite set of (principal, value) facts. Values are ground.
class KnowledgeState {
 public:
  KnowledgeState() = default;
  KnowledgeState(std::initializer_list<Fact> facts);

  // Throws ConstructionError for a non-ground term.
  bool add(std::string principal, Term term);
  bool contains(std::string_view principal, Term term) const;
  const std::set<Fact>& facts() const { return facts_; }
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }

  // Values known by one principal, canonical order.
  std::vector<Term> known_by(std::string_view principal) const;
  std::set<std::string> principals() const;

  bool subset_of(const KnowledgeState& other) const;
  friend bool operator==(const KnowledgeState&, const KnowledgeState&) = default;

 private:
  std::set<Fact> facts_;
};

// Values only `owner` may draw (single-source axiom).
struct FixedSet {
  Principal owner;
  TermSet members;
};

std::set<std::string> source(const KnowledgeState& k0, Term v);
TermSet knowledge(const KnowledgeState& k);
TermSet oscar_view(const KnowledgeState& k, std::string_view oscar = kOscar);

// Collapses every adversary into the single principal `o`. Self-rules created
// by the collapse are dropped. Throws ValidationError if the adversary set is
// empty or names a primitive.
std::pair<KnowledgeState, std::vector<PatternRule>> merge(const std::vector<Principal>& adversaries,
                                                          const KnowledgeState& k,
                                                          const std::vector<PatternRule>& rules);

// Worst case for Oscar: every honest and primitive principal already holds
// every universe value outside the fixed sets.
KnowledgeState saturate_honest(const KnowledgeState& k0, const std::vector<Principal>& principals,
                               const std::vector<Term>& universe,
                               const std::vector<FixedSet>& fixed);

}  // namespace kflow
