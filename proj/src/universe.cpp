#include "kflow/universe.hpp"

#include <algorithm>

#include "kflow/error.hpp"

namespace kflow {

Universe Universe::closure_of(const std::vector<Term>& seeds, std::size_t cap) {
  TermSet all;
  std::vector<Term> stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    Term t = stack.back();
    stack.pop_back();
    if (!t.ground()) throw ConstructionError("universe terms must be ground: " + to_sexpr(t));
    if (!all.insert(t).second) continue;
    if (all.size() > cap) {
      throw ResourceError("universe exceeds cap of " + std::to_string(cap) + " terms", all.size());
    }
    for (Term c : t.children()) stack.push_back(c);
  }
  Universe u;
  u.terms_.assign(all.begin(), all.end());
  u.index();
  return u;
}

Universe Universe::enumerate(const TermSet& atoms, const std::set<Tag>& ctors, int max_depth,
                             std::size_t cap) {
  Universe u;
  u.terms_ = enumerate_universe(atoms, ctors, max_depth, cap);
  u.index();
  return u;
}

void Universe::index() {
  members_ = TermHashSet(terms_.begin(), terms_.end());
  by_depth_ = terms_;
  std::stable_sort(by_depth_.begin(), by_depth_.end(),
                   [](Term a, Term b) { return a.depth() < b.depth(); });
}

}  // namespace kflow
