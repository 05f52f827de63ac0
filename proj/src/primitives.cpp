#include "kflow/primitives.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "kflow/error.hpp"

namespace kflow {

namespace {

const Term S = var("s");
const Term X = var("x");
const Term Y = var("y");
const Term K = var("k");
const Term V = var("v");
const Term I = var("i");

PrimitiveSpec make_spec(std::string principal, std::vector<Term> schema,
                        std::set<std::size_t> c, std::set<std::size_t> d,
                        std::map<std::size_t, std::set<std::size_t>> w,
                        std::vector<Guard> guards = {}) {
  PrimitiveSpec s;
  s.principal = std::move(principal);
  s.arity = schema.size();
  s.schema = std::move(schema);
  s.composing = std::move(c);
  s.decomposing = std::move(d);
  s.premise_sets = std::move(w);
  s.guards = std::move(guards);
  return s;
}

ProjectedRule rule(std::string id, std::string origin, std::vector<Term> premises, Term conclusion,
                   RuleKind kind, std::optional<std::size_t> controlling = std::nullopt,
                   std::vector<Guard> guards = {}) {
  ProjectedRule r;
  r.id = std::move(id);
  r.origin = std::move(origin);
  r.premises = std::move(premises);
  r.conclusion = conclusion;
  r.kind = kind;
  r.controlling = controlling;
  r.guards = std::move(guards);
  return r;
}

// Rules of one primitive as seen by `learner`.
std::vector<ProjectedRule> learner_rules(std::string_view prim, std::string_view learner) {
  using RK = RuleKind;
  const std::vector<Guard> sym{{"k", Tag::PubKey}};
  std::string p(prim);
  if (prim == "e") {
    return {
        rule("e1", p, {S}, pk(S), RK::Composing),
        rule("e2", p, {X, pk(S)}, enc(pk(S), X), RK::Composing),
        rule("e3", p, {S, enc(pk(S), X)}, X, RK::Decomposing, 1),
        rule("sign", p, {X, S}, sig(S, X), RK::Composing),
    };
  }
  if (prim == "se") {
    return {
        rule("se2", p, {X, K}, enc(K, X), RK::Composing, std::nullopt, sym),
        rule("se3", p, {K, enc(K, X)}, X, RK::Decomposing, 1, sym),
    };
  }
  if (prim == "t") {
    return {
        rule("d1", p, {X, Y}, pair(X, Y), RK::Composing),
        rule("d2", p, {pair(X, Y)}, X, RK::Decomposing, 0),
        rule("d3", p, {pair(X, Y)}, Y, RK::Decomposing, 0),
    };
  }
  if (prim == "set") {
    return {
        rule("set1", p, {X, Y}, set2(X, Y), RK::Composing),
        rule("set2", p, {set2(X, Y)}, X, RK::Decomposing, 0),
        rule("set3", p, {set2(X, Y)}, Y, RK::Decomposing, 0),
    };
  }
  if (prim == "n") {
    return {rule("st1", p, {V}, nonce(V, identity(std::string(learner))), RK::Composing)};
  }
  if (prim == "h") {
    return {rule("cp1", p, {X}, hash(X), RK::Composing)};
  }
  if (prim == "r") {
    return {
        rule("eqr1", p, {X, Y}, rule_val(X, Y), RK::Composing),
        rule("eqr2", p, {X, rule_val(X, Y)}, Y, RK::Decomposing, 1),
    };
  }
  throw ValidationError("unknown primitive '" + p + "'");
}

}  // namespace

std::vector<std::string> builtin_primitive_names() { return {"e", "se", "t", "set", "n", "h", "r"}; }

std::vector<PrimitiveSpec> builtin_specs() {
  return {
      make_spec("e", {S, pk(S), X, enc(pk(S), X), sig(S, X)}, {2, 4, 5}, {3},
                {{2, {1}}, {3, {1, 4}}, {4, {2, 3}}, {5, {1, 3}}}),
      make_spec("se", {K, X, enc(K, X)}, {3}, {2}, {{3, {1, 2}}, {2, {1, 3}}},
                {{"k", Tag::PubKey}}),
      make_spec("t", {X, Y, pair(X, Y)}, {3}, {1, 2}, {{3, {1, 2}}, {1, {3}}, {2, {3}}}),
      make_spec("set", {X, Y, set2(X, Y)}, {3}, {1, 2}, {{3, {1, 2}}, {1, {3}}, {2, {3}}}),
      make_spec("n", {V, I, nonce(V, I)}, {3}, {}, {{3, {1}}}),
      make_spec("h", {X, hash(X)}, {2}, {}, {{2, {1}}}),
      make_spec("r", {X, Y, rule_val(X, Y)}, {3}, {2}, {{3, {1, 2}}, {2, {1, 3}}}),
  };
}

std::optional<PrimitiveSpec> builtin_spec(std::string_view name) {
  for (auto& s : builtin_specs()) {
    if (s.principal == name) return s;
  }
  return std::nullopt;
}

void validate_spec(const PrimitiveSpec& spec) {
  auto bad = [&](const std::string& msg) {
    throw ValidationError("primitive '" + spec.principal + "': " + msg);
  };
  if (spec.arity == 0 || spec.schema.size() != spec.arity) bad("schema length must equal arity");
  auto in_range = [&](std::size_t i) { return i >= 1 && i <= spec.arity; };
  for (auto i : spec.composing) {
    if (!in_range(i)) bad("composing index " + std::to_string(i) + " out of range");
  }
  for (auto i : spec.decomposing) {
    if (!in_range(i)) bad("decomposing index " + std::to_string(i) + " out of range");
    if (spec.composing.count(i)) bad("index " + std::to_string(i) + " is in both C and D");
  }
  for (const auto& [i, w] : spec.premise_sets) {
    if (!spec.composing.count(i) && !spec.decomposing.count(i)) {
      bad("W_" + std::to_string(i) + " defined outside C and D");
    }
    for (auto j : w) {
      if (!in_range(j)) bad("W_" + std::to_string(i) + " index " + std::to_string(j) + " out of range");
    }
  }
  for (auto i : spec.composing) {
    if (!spec.premise_sets.count(i)) bad("missing W_" + std::to_string(i));
  }
  for (auto i : spec.decomposing) {
    if (!spec.premise_sets.count(i)) bad("missing W_" + std::to_string(i));
  }
  if (spec.composing.empty()) bad("C must be nonempty");
}

nlohmann::json to_json(const AxiomReport& r) {
  nlohmann::json j;
  j["principal"] = r.principal;
  j["pass"] = r.pass;
  j["tuples_checked"] = r.tuples_checked;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : r.violations) {
    j["violations"].push_back(
        {{"condition", v.condition}, {"message", v.message}, {"positions", v.positions}});
  }
  return j;
}

std::vector<std::vector<Term>> spec_tuples(const PrimitiveSpec& spec,
                                           const std::vector<Term>& universe, std::size_t cap) {
  std::set<std::string> vars;
  for (Term t : spec.schema) {
    auto v = variables(t);
    vars.insert(v.begin(), v.end());
  }
  std::vector<std::string> order(vars.begin(), vars.end());
  std::unordered_set<Term> members(universe.begin(), universe.end());
  std::vector<std::vector<Term>> out;
  Substitution subst;
  std::size_t visited = 0;
  std::function<void(std::size_t)> assign = [&](std::size_t k) {
    if (k == order.size()) {
      if (++visited > cap) {
        throw ResourceError("too many schema instantiations for '" + spec.principal + "'", visited);
      }
      if (!guards_hold(spec.guards, subst)) return;
      std::vector<Term> tuple;
      for (Term t : spec.schema) {
        Term x = instantiate(t, subst);
        if (!members.count(x)) return;
        tuple.push_back(x);
      }
      out.push_back(std::move(tuple));
      return;
    }
    for (Term u : universe) {
      subst[order[k]] = u;
      assign(k + 1);
    }
    subst.erase(order[k]);
  };
  assign(0);
  return out;
}

AxiomReport check_local_cf(const PrimitiveSpec& spec, const std::vector<Term>& sample_universe) {
  validate_spec(spec);
  AxiomReport report;
  report.principal = spec.principal;

  // (s1)
  for (auto i : spec.decomposing) {
    const auto& wi = spec.premise_sets.at(i);
    bool ok = false;
    for (auto h : spec.composing) {
      if (wi.count(h) && spec.premise_sets.at(h).count(i)) ok = true;
    }
    if (!ok) {
      report.violations.push_back(
          {"s1",
           "decomposing position " + std::to_string(i) +
               " has no composing h with h in W_i and i in W_h",
           {i}});
    }
  }

  // (s2), exhaustively over the sample.
  struct Seen {
    TermSet premises;
    std::size_t position;
  };
  std::unordered_map<Term, Seen> seen;
  auto tuples = spec_tuples(spec, sample_universe);
  report.tuples_checked = tuples.size();
  bool s2_reported = false;
  for (const auto& tuple : tuples) {
    for (auto i : spec.composing) {
      TermSet w;
      for (auto j : spec.premise_sets.at(i)) w.insert(tuple[j - 1]);
      Term v = tuple[i - 1];
      auto [it, fresh] = seen.emplace(v, Seen{w, i});
      if (!fresh && it->second.premises != w && !s2_reported) {
        s2_reported = true;
        report.violations.push_back(
            {"s2",
             "value " + to_sexpr(v) + " appears at composing positions " +
                 std::to_string(it->second.position) + " and " + std::to_string(i) +
                 " with different premise sets",
             {it->second.position, i}});
      }
    }
  }
  report.pass = report.violations.empty();
  return report;
}

std::vector<Classification> classify(const PrimitiveSpec& spec) {
  validate_spec(spec);
  std::vector<Classification> out;
  for (std::size_t i = 1; i <= spec.arity; ++i) {
    if (spec.composing.count(i)) {
      out.push_back({i, RuleKind::Composing, std::nullopt});
    } else if (spec.decomposing.count(i)) {
      std::optional<std::size_t> ctrl;
      for (auto h : spec.composing) {
        if (spec.premise_sets.at(i).count(h) && spec.premise_sets.at(h).count(i)) {
          ctrl = h;
          break;
        }
      }
      if (!ctrl) {
        throw ValidationError("position " + std::to_string(i) + " violates (s1); cannot classify");
      }
      out.push_back({i, RuleKind::Decomposing, ctrl});
    }
  }
  return out;
}

bool in_image(const PrimitiveSpec& spec, Term v) {
  for (auto i : spec.composing) {
    for (const auto& s : match_all(spec.at(i), v)) {
      if (guards_hold(spec.guards, s)) return true;
    }
  }
  return false;
}

StrataMap strata(const std::vector<Term>& universe, const std::vector<PrimitiveSpec>& specs,
                 const TermSet& extra_image) {
  StrataMap map;
  std::vector<Term> pending;
  for (Term t : universe) {
    bool image = extra_image.count(t) > 0;
    for (const auto& s : specs) image = image || in_image(s, t);
    if (image) {
      pending.push_back(t);
    } else {
      map.level.emplace(t, 0);
    }
  }

  auto reachable = [&](Term t, int below) {
    if (extra_image.count(t)) return false;
    for (const auto& spec : specs) {
      for (auto i : spec.composing) {
        for (const auto& s : match_all(spec.at(i), t)) {
          if (!guards_hold(spec.guards, s)) continue;
          bool ok = true;
          for (auto j : spec.premise_sets.at(i)) {
            auto x = try_instantiate(spec.at(j), s);
            auto it = x ? map.level.find(*x) : map.level.end();
            if (it == map.level.end() || it->second > below) {
              ok = false;
              break;
            }
          }
          if (ok) return true;
        }
      }
    }
    return false;
  };

  for (int n = 0;; ++n) {
    std::vector<Term> next;
    std::vector<Term> still;
    for (Term t : pending) {
      (reachable(t, n) ? next : still).push_back(t);
    }
    if (next.empty()) break;
    for (Term t : next) map.level.emplace(t, n + 1);
    map.max_level = n + 1;
    pending = std::move(still);
  }
  map.unreached.insert(pending.begin(), pending.end());
  return map;
}

FixedSet fixed_set(const std::vector<Term>& universe, const PrimitiveSpec& spec,
                   const TermSet& extra_image) {
  auto m = strata(universe, {spec}, extra_image);
  return FixedSet{Principal{spec.principal, PrincipalKind::Primitive}, m.unreached};
}

std::vector<std::pair<Term, std::vector<std::string>>> image_collisions(
    const std::vector<PrimitiveSpec>& specs, const std::vector<Term>& universe) {
  std::vector<std::pair<Term, std::vector<std::string>>> out;
  for (Term t : universe) {
    std::vector<std::string> owners;
    for (const auto& s : specs) {
      if (in_image(s, t)) owners.push_back(s.principal);
    }
    if (owners.size() > 1) out.emplace_back(t, std::move(owners));
  }
  return out;
}

std::vector<ProjectedRule> oscar_rules(const std::vector<std::string>& primitives,
                                       std::string_view oscar) {
  std::vector<ProjectedRule> out;
  for (const auto& p : primitives) {
    auto rs = learner_rules(p, oscar);
    out.insert(out.end(), rs.begin(), rs.end());
  }
  return out;
}

std::vector<PatternRule> primitive_rules(std::string_view primitive,
                                         const std::vector<Principal>& learners) {
  std::vector<PatternRule> out;
  for (const auto& learner : learners) {
    if (learner.name == primitive) continue;
    for (auto& r : learner_rules(primitive, learner.name)) {
      PatternRule pr;
      pr.id = r.id;
      pr.teller = Principal{std::string(primitive), PrincipalKind::Primitive};
      pr.taught = r.conclusion;
      pr.learner = learner;
      pr.premises = r.premises;
      for (Term p : r.premises) {
        auto v = variables(p);
        pr.quantified_vars.insert(v.begin(), v.end());
      }
      pr.kind = r.kind;
      pr.controlling = r.controlling;
      pr.guards = r.guards;
      out.push_back(std::move(pr));
    }
  }
  return out;
}

std::set<Tag> primitive_constructors(const std::vector<std::string>& primitives) {
  std::set<Tag> out;
  for (const auto& r : oscar_rules(primitives)) {
    if (r.kind == RuleKind::Composing) out.insert(r.conclusion.tag());
  }
  return out;
}

}  // namespace kflow
