#pragma once

// Interned terms of a free, acyclic algebra.
//
// Every term is hash-consed into one process-wide, append-only table, so two
// terms are structurally equal exactly when their handles compare equal.
// Children must exist before their parent is interned, which makes cyclic
// terms (x = E_s(x)) impossible to build.

#include <compare>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace kflow {

// Declaration order is the canonical rank used by term ordering.
enum class Tag : std::uint8_t {
  Epsilon,
  Atom,
  Identity,
  Var,
  PubKey,
  Hash,
  Enc,
  Sig,
  Nonce,
  Pair,
  Set2,
  RuleVal,
};

std::string_view tag_keyword(Tag tag);
bool tag_from_keyword(std::string_view word, Tag& out);
std::size_t tag_arity(Tag tag);
bool is_leaf(Tag tag);

struct TermNode;

class Term {
 public:
  Term() = default;

  Tag tag() const;
  // Atom, Identity and Var carry a name; everything else has an empty one.
  const std::string& name() const;
  std::size_t arity() const;
  Term child(std::size_t i) const;
  std::span<const Term> children() const;

  std::uint32_t id() const;
  int depth() const;
  bool ground() const;

  explicit operator bool() const { return node_ != nullptr; }

  friend bool operator==(Term a, Term b) { return a.node_ == b.node_; }
  // Canonical total order: constructor rank, then name, then children.
  friend std::strong_ordering operator<=>(Term a, Term b);

 private:
  friend class TermStore;
  explicit Term(const TermNode* node) : node_(node) {}
  const TermNode* node_ = nullptr;
};

using TermSet = std::set<Term>;

// Generic constructor. Throws ConstructionError on arity mismatch or a null child.
Term make_term(Tag tag, std::string name, std::span<const Term> children);

Term eps();
Term atom(std::string name);
Term identity(std::string principal);
Term var(std::string name);
Term pk(Term secret);
Term hash(Term x);
Term enc(Term key, Term payload);
Term sig(Term key, Term payload);
Term nonce(Term seed, Term id);
Term pair(Term a, Term b);
Term set2(Term a, Term b);
Term rule_val(Term premise, Term conclusion);

bool is_ground(Term t);
TermSet subterms(Term t);
std::set<std::string> variables(Term t);
// Leaves other than variables: atoms, identities and epsilon.
TermSet leaves(Term t);
std::set<Tag> constructors(Term t);

std::size_t intern_table_size();

// Canonical s-expression, e.g. (enc (pk skb) (pair (id a) (nonce eps (id a)))).
std::string to_sexpr(Term t);
Term term_from_sexpr(std::string_view text);

// Nested tree form: {"tag":"enc","args":[...]}, leaves {"tag":"atom","name":"a"}.
nlohmann::json to_json(Term t);
Term term_from_json(const nlohmann::json& j);

// Node-table form with children referenced by index. Shared subterms are
// emitted once. Loading rejects out-of-range references and cycles.
nlohmann::json to_graph_json(Term t);
Term term_from_graph_json(const nlohmann::json& j);

// All ground terms of nesting depth <= max_depth built from `atoms` with the
// given constructors, in canonical order. Throws ResourceError past `cap`.
std::vector<Term> enumerate_universe(const TermSet& atoms, const std::set<Tag>& ctors,
                                     int max_depth, std::size_t cap = 1'000'000);

}  // namespace kflow

template <>
struct std::hash<kflow::Term> {
  std::size_t operator()(kflow::Term t) const noexcept { return t.id(); }
};

namespace kflow {
using TermHashSet = std::unordered_set<Term>;
}
