#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "kflow/knowledge.hpp"
#include "kflow/rules.hpp"
#include "kflow/term.hpp"

namespace kflow {

// A tuple relation S ⊆ V^m described by a schema of m patterns over shared
// variables, with composing positions C, decomposing positions D and premise
// index sets W_i. Positions are 1-based throughout.
struct PrimitiveSpec {
  std::string principal;
  std::size_t arity = 0;
  std::vector<Term> schema;
  std::set<std::size_t> composing;
  std::set<std::size_t> decomposing;
  std::map<std::size_t, std::set<std::size_t>> premise_sets;
  std::vector<Guard> guards;

  Term at(std::size_t position) const { return schema.at(position - 1); }
};

// e (keygen/encrypt/decrypt/sign), se (symmetric encryption), t (pairing),
// set (2-sets), n (nonces), h (hashing), r (rule values).
std::vector<PrimitiveSpec> builtin_specs();
std::optional<PrimitiveSpec> builtin_spec(std::string_view name);
std::vector<std::string> builtin_primitive_names();

// Throws ValidationError for out-of-range indices, C ∩ D ≠ ∅, W not defined
// exactly on C ∪ D, or a schema whose length differs from the arity.
void validate_spec(const PrimitiveSpec& spec);

struct AxiomViolation {
  std::string condition;  // "s1" or "s2"
  std::string message;
  std::vector<std::size_t> positions;
};

struct AxiomReport {
  std::string principal;
  bool pass = true;
  std::vector<AxiomViolation> violations;
  std::size_t tuples_checked = 0;
};

nlohmann::json to_json(const AxiomReport& r);

// Every schema instantiation whose components all lie in `universe`.
std::vector<std::vector<Term>> spec_tuples(const PrimitiveSpec& spec,
                                           const std::vector<Term>& universe,
                                           std::size_t cap = 5'000'000);

AxiomReport check_local_cf(const PrimitiveSpec& spec, const std::vector<Term>& sample_universe);

struct Classification {
  std::size_t position;
  RuleKind kind;
  std::optional<std::size_t> controlled_by;
};

// Composing for i ∈ C; decomposing for i ∈ D, controlled by the h ∈ C that
// witnesses condition (s1). Requires a spec that passes s1.
std::vector<Classification> classify(const PrimitiveSpec& spec);

struct StrataMap {
  std::unordered_map<Term, int> level;
  TermSet unreached;  // universe members outside S_∞
  int max_level = 0;

  // Least n with t ∈ S_n, or -1 when t never enters a stratum.
  int stratum(Term t) const {
    auto it = level.find(t);
    return it == level.end() ? -1 : it->second;
  }
  bool precedes(Term a, Term b) const {
    int la = stratum(a);
    int lb = stratum(b);
    return la >= 0 && lb >= 0 && la < lb;
  }
};

bool in_image(const PrimitiveSpec& spec, Term v);

// `extra_image` declares additional Im(S) members that have no constructor
// witness; they can only ever be fixed.
StrataMap strata(const std::vector<Term>& universe, const std::vector<PrimitiveSpec>& specs,
                 const TermSet& extra_image = {});

FixedSet fixed_set(const std::vector<Term>& universe, const PrimitiveSpec& spec,
                   const TermSet& extra_image = {});

// Universe terms claimed by composing positions of more than one primitive.
std::vector<std::pair<Term, std::vector<std::string>>> image_collisions(
    const std::vector<PrimitiveSpec>& specs, const std::vector<Term>& universe);

// Oscar-facing projected rules of the named primitives, classified.
std::vector<ProjectedRule> oscar_rules(const std::vector<std::string>& primitives,
                                       std::string_view oscar = kOscar);

// Full communication rules of one primitive for each learner.
std::vector<PatternRule> primitive_rules(std::string_view primitive,
                                         const std::vector<Principal>& learners);

// Composing constructors reachable through the named primitives.
std::set<Tag> primitive_constructors(const std::vector<std::string>& primitives);

}  // namespace kflow
