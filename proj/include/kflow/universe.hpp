#pragma once

#include <cstddef>
#include <vector>

#include "kflow/term.hpp"

namespace kflow {

// A finite, subterm-closed set of ground values standing in for V.
// Both the naive oracle and the two-phase engine only ever produce values
// inside the universe they are given.
class Universe {
 public:
  Universe() = default;

  // Subterm closure of `seeds`. Throws ResourceError past `cap`.
  static Universe closure_of(const std::vector<Term>& seeds, std::size_t cap = 1'000'000);
  // Exhaustive enumeration, see enumerate_universe.
  static Universe enumerate(const TermSet& atoms, const std::set<Tag>& ctors, int max_depth,
                            std::size_t cap = 1'000'000);

  bool contains(Term t) const { return members_.count(t) > 0; }
  std::size_t size() const { return terms_.size(); }
  // Canonical order.
  const std::vector<Term>& terms() const { return terms_; }
  // Children before parents: ascending depth, canonical within a depth.
  const std::vector<Term>& by_depth() const { return by_depth_; }

 private:
  void index();
  std::vector<Term> terms_;
  std::vector<Term> by_depth_;
  TermHashSet members_;
};

}  // namespace kflow
