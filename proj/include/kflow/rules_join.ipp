#pragma once

// Implementation of join_premises; included from rules.hpp.

namespace kflow::detail {

template <typename Contains, typename Callback>
bool join_step(const std::vector<Term>& premises, std::vector<bool>& done,
               const std::vector<Term>& candidates, Contains& contains, const Substitution& subst,
               Callback& cb) {
  // Ground-able premises are plain membership tests.
  std::size_t best = premises.size();
  int best_depth = -1;
  for (std::size_t i = 0; i < premises.size(); ++i) {
    if (done[i]) continue;
    if (auto g = try_instantiate(premises[i], subst)) {
      if (!contains(*g)) return true;
      done[i] = true;
      bool keep_going = join_step(premises, done, candidates, contains, subst, cb);
      done[i] = false;
      return keep_going;
    }
    if (premises[i].depth() > best_depth) {
      best = i;
      best_depth = premises[i].depth();
    }
  }
  if (best == premises.size()) return cb(subst);
  done[best] = true;
  for (Term c : candidates) {
    for (const auto& next : match_all(premises[best], c, subst)) {
      if (!join_step(premises, done, candidates, contains, next, cb)) {
        done[best] = false;
        return false;
      }
    }
  }
  done[best] = false;
  return true;
}

}  // namespace kflow::detail

namespace kflow {

template <typename Contains, typename Callback>
bool join_premises(const std::vector<Term>& premises, const std::vector<Term>& candidates,
                   Contains&& contains, const Substitution& start, Callback&& cb) {
  std::vector<bool> done(premises.size(), false);
  return detail::join_step(premises, done, candidates, contains, start, cb);
}

}  // namespace kflow
