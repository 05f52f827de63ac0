#include "kflow/dsl.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "kflow/error.hpp"

namespace kflow {

namespace {

using Issues = std::vector<ParseIssue>;

void issue(Issues& out, const SExpr& at, std::string msg) {
  out.push_back({at.line, at.column, std::move(msg)});
}

SExpr sym(std::string s) { return SExpr::symbol(std::move(s)); }

// Reads one s-expression from a snippet; used for builtin bodies.
SExpr sx(std::string_view text) { return read_sexprs(text).at(0); }

const Principal* find_principal(const ProtocolSpec& spec, std::string_view name) {
  for (const auto& p : spec.principals) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

bool is_keyword(std::string_view s) {
  Tag t;
  return s == "eps" || s == "sk" || tag_from_keyword(s, t);
}

// Term resolution with role variables already bound to principal names.
class Resolver {
 public:
  Resolver(const ProtocolSpec& spec, const std::map<std::string, std::string>& roles,
           Issues& issues)
      : spec_(spec), roles_(roles), issues_(issues) {}

  std::optional<Term> resolve(const SExpr& e) {
    if (e.is_symbol()) return resolve_symbol(e);
    if (e.items.empty() || !e.items[0].is_symbol()) {
      issue(issues_, e, "expected a term");
      return std::nullopt;
    }
    const std::string& head = e.items[0].atom;
    const std::size_t nargs = e.items.size() - 1;
    if (head == "id" || head == "sk") {
      if (nargs != 1 || !e.items[1].is_symbol()) {
        issue(issues_, e, "(" + head + " ...) expects one principal");
        return std::nullopt;
      }
      auto who = principal_of(e.items[1]);
      if (!who) return std::nullopt;
      return head == "id" ? identity(*who) : atom("sk" + *who);
    }
    if (head == "var") {
      if (nargs != 1 || !e.items[1].is_symbol()) {
        issue(issues_, e, "(var ...) expects one name");
        return std::nullopt;
      }
      return var(e.items[1].atom);
    }
    if (head == "atom") {
      if (nargs != 1 || !e.items[1].is_symbol()) {
        issue(issues_, e, "(atom ...) expects one name");
        return std::nullopt;
      }
      return resolve_symbol(e.items[1]);
    }
    Tag tag;
    if (!tag_from_keyword(head, tag) || is_leaf(tag)) {
      issue(issues_, e.items[0], "unknown constructor '" + head + "'");
      return std::nullopt;
    }
    std::vector<Term> args;
    bool ok = true;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      auto t = resolve(e.items[i]);
      ok = ok && t.has_value();
      if (t) args.push_back(*t);
    }
    const bool nary = tag == Tag::Pair && nargs >= 2;
    if (!nary && nargs != tag_arity(tag)) {
      issue(issues_, e, head + " expects " + std::to_string(tag_arity(tag)) + " arguments");
      return std::nullopt;
    }
    if (!ok) return std::nullopt;
    // (pair a b c) is (pair a (pair b c)).
    Term acc = args.back();
    for (std::size_t i = args.size() - 1; i-- > 0;) {
      std::array<Term, 2> kids{args[i], acc};
      acc = make_term(tag, {}, kids);
    }
    if (args.size() == 1) {
      std::array<Term, 1> kids{args[0]};
      acc = make_term(tag, {}, kids);
    }
    return acc;
  }

 private:
  std::optional<Term> resolve_symbol(const SExpr& e) {
    const std::string& s = e.atom;
    if (s == "eps") return eps();
    if (std::find(spec_.atoms.begin(), spec_.atoms.end(), s) != spec_.atoms.end()) return atom(s);
    if (roles_.count(s)) {
      issue(issues_, e, "role variable '" + s + "' used as a value; write (id " + s + ")");
    } else if (find_principal(spec_, s)) {
      issue(issues_, e, "principal '" + s + "' used as a value; write (id " + s + ")");
    } else {
      issue(issues_, e, "undeclared identifier '" + s + "'");
    }
    return std::nullopt;
  }

  std::optional<std::string> principal_of(const SExpr& e) {
    if (auto it = roles_.find(e.atom); it != roles_.end()) return it->second;
    if (find_principal(spec_, e.atom)) return e.atom;
    issue(issues_, e, "undeclared principal '" + e.atom + "'");
    return std::nullopt;
  }

  const ProtocolSpec& spec_;
  const std::map<std::string, std::string>& roles_;
  Issues& issues_;
};

// Every assignment of role variables to domain members, first variable slowest.
std::vector<std::map<std::string, std::string>> expand_roles(
    const std::vector<RoleQuantifier>& roles) {
  std::vector<std::map<std::string, std::string>> out{{}};
  for (const auto& q : roles) {
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& partial : out) {
      for (const auto& member : q.domain) {
        auto m = partial;
        m[q.var] = member;
        next.push_back(std::move(m));
      }
    }
    out = std::move(next);
  }
  return out;
}

void check_roles(const ProtocolSpec& spec, const std::vector<RoleQuantifier>& roles,
                 const SExpr& anchor, Issues& issues) {
  std::set<std::string> seen;
  for (const auto& q : roles) {
    if (!seen.insert(q.var).second) issue(issues, anchor, "role variable '" + q.var + "' repeated");
    if (find_principal(spec, q.var)) {
      issue(issues, anchor, "role variable '" + q.var + "' shadows a principal");
    }
    if (q.domain.empty()) issue(issues, anchor, "role variable '" + q.var + "' has an empty domain");
    for (const auto& m : q.domain) {
      if (!find_principal(spec, m)) issue(issues, anchor, "undeclared principal '" + m + "'");
    }
  }
}

std::map<std::string, std::string> first_assignment(const std::vector<RoleQuantifier>& roles) {
  std::map<std::string, std::string> m;
  for (const auto& q : roles) m[q.var] = q.domain.empty() ? std::string() : q.domain.front();
  return m;
}

// Positions of the (var v) forms inside `e`.
void var_sites(const SExpr& e, std::map<std::string, const SExpr*>& out) {
  if (e.is_form("var") && e.items.size() == 2 && e.items[1].is_symbol()) {
    out.try_emplace(e.items[1].atom, &e.items[1]);
    return;
  }
  if (e.is_list) {
    for (const auto& c : e.items) var_sites(c, out);
  }
}

Issues check_spec(const ProtocolSpec& spec, const SExpr& anchor) {
  Issues issues;
  std::set<std::string> names;
  bool adversary = false;
  for (const auto& p : spec.principals) {
    if (!names.insert(p.name).second) issue(issues, anchor, "principal '" + p.name + "' declared twice");
    if (p.kind == PrincipalKind::Primitive) {
      issue(issues, anchor, "principal '" + p.name + "': primitives are enabled with (use ...)");
    }
    if (is_keyword(p.name)) issue(issues, anchor, "principal name '" + p.name + "' is a keyword");
    adversary = adversary || p.kind == PrincipalKind::Adversary;
  }
  if (!adversary) issue(issues, anchor, "protocol declares no adversary");
  for (const auto& a : spec.atoms) {
    if (is_keyword(a)) issue(issues, anchor, "atom name '" + a + "' is a keyword");
    if (find_principal(spec, a)) issue(issues, anchor, "atom '" + a + "' clashes with a principal");
  }
  auto builtins = builtin_primitive_names();
  for (const auto& u : spec.primitives) {
    if (std::find(builtins.begin(), builtins.end(), u) == builtins.end()) {
      issue(issues, anchor, "unknown primitive '" + u + "'");
    }
  }

  const std::map<std::string, std::string> no_roles;
  for (const auto& f : spec.facts) {
    if (!find_principal(spec, f.principal)) {
      issue(issues, f.term, "undeclared principal '" + f.principal + "'");
    }
    Resolver r(spec, no_roles, issues);
    if (auto t = r.resolve(f.term); t && !t->ground()) {
      issue(issues, f.term, "initial knowledge must be ground");
    }
  }

  std::set<std::string> rule_names;
  for (const auto& rule : spec.rules) {
    const SExpr& at = rule.conclusion;
    if (!rule.name.empty() && !rule_names.insert(rule.name).second) {
      issue(issues, at, "rule '" + rule.name + "' declared twice");
    }
    check_roles(spec, rule.roles, at, issues);
    auto env = first_assignment(rule.roles);
    if (rule.teller) {
      const Principal* p = find_principal(spec, *rule.teller);
      bool role = env.count(*rule.teller) > 0;
      if (!p && !role) issue(issues, at, "undeclared teller '" + *rule.teller + "'");
      if (p && p->kind != PrincipalKind::Honest) {
        issue(issues, at, "teller '" + *rule.teller + "' is not honest");
      }
    }
    Resolver r(spec, env, issues);
    for (const auto& p : rule.premises) r.resolve(p);
    r.resolve(rule.conclusion);

    std::map<std::string, const SExpr*> bound, used;
    for (const auto& p : rule.premises) var_sites(p, bound);
    var_sites(rule.conclusion, used);
    for (const auto& [v, site] : used) {
      if (!bound.count(v)) issue(issues, *site, "unbound variable " + v);
    }
  }

  std::set<std::string> query_names;
  for (const auto& q : spec.queries) {
    if (!query_names.insert(q.name).second) {
      issue(issues, q.target, "query '" + q.name + "' declared twice");
    }
    check_roles(spec, q.roles, q.target, issues);
    auto env = first_assignment(q.roles);
    Resolver r(spec, env, issues);
    if (auto t = r.resolve(q.target); t && !t->ground()) {
      issue(issues, q.target, "query target must be ground");
    }
  }
  return issues;
}

std::optional<PrincipalKind> kind_word(const std::string& s) {
  if (s == "honest") return PrincipalKind::Honest;
  if (s == "adversary") return PrincipalKind::Adversary;
  return std::nullopt;
}

std::vector<RoleQuantifier> parse_forall(const SExpr& form, Issues& issues) {
  std::vector<RoleQuantifier> out;
  for (std::size_t i = 1; i < form.items.size(); ++i) {
    const SExpr& b = form.items[i];
    if (!b.is_list || b.items.size() != 3 || !b.items[0].is_symbol() || !b.items[1].is_symbol("in") ||
        !b.items[2].is_list) {
      issue(issues, b, "expected (<role> in (<principal> ...))");
      continue;
    }
    RoleQuantifier q{b.items[0].atom, {}};
    for (const auto& m : b.items[2].items) {
      if (!m.is_symbol()) {
        issue(issues, m, "expected a principal name");
        continue;
      }
      q.domain.push_back(m.atom);
    }
    out.push_back(std::move(q));
  }
  return out;
}

bool symbols_after_head(const SExpr& form, std::vector<std::string>& out, Issues& issues) {
  bool ok = true;
  for (std::size_t i = 1; i < form.items.size(); ++i) {
    if (!form.items[i].is_symbol()) {
      issue(issues, form.items[i], "expected a name");
      ok = false;
      continue;
    }
    out.push_back(form.items[i].atom);
  }
  return ok;
}

RuleDecl parse_rule(const SExpr& form, Issues& issues) {
  RuleDecl rule;
  std::size_t i = 1;
  if (i < form.items.size() && form.items[i].is_symbol()) rule.name = form.items[i++].atom;
  bool concluded = false;
  for (; i < form.items.size(); ++i) {
    const SExpr& c = form.items[i];
    if (c.is_form("forall")) {
      auto qs = parse_forall(c, issues);
      rule.roles.insert(rule.roles.end(), qs.begin(), qs.end());
    } else if (c.is_form("teller")) {
      if (c.items.size() != 2 || !c.items[1].is_symbol()) {
        issue(issues, c, "(teller ...) expects one principal");
      } else {
        rule.teller = c.items[1].atom;
      }
    } else if (c.is_form("premise")) {
      rule.premises.insert(rule.premises.end(), c.items.begin() + 1, c.items.end());
    } else if (c.is_form("conclude")) {
      if (c.items.size() != 2) {
        issue(issues, c, "(conclude ...) expects one term");
      } else if (concluded) {
        issue(issues, c, "rule has more than one conclusion");
      } else {
        rule.conclusion = c.items[1];
        concluded = true;
      }
    } else {
      issue(issues, c, "expected forall, teller, premise or conclude");
    }
  }
  if (!concluded) {
    issue(issues, form, "rule without (conclude ...)");
    rule.conclusion = sym("eps");
    rule.conclusion.line = form.line;
    rule.conclusion.column = form.column;
  }
  return rule;
}

SExpr roles_sexpr(const std::vector<RoleQuantifier>& roles) {
  std::vector<SExpr> items{sym("forall")};
  for (const auto& q : roles) {
    std::vector<SExpr> dom;
    for (const auto& m : q.domain) dom.push_back(sym(m));
    items.push_back(SExpr::list({sym(q.var), sym("in"), SExpr::list(std::move(dom))}));
  }
  return SExpr::list(std::move(items));
}

std::vector<PrimitiveSpec> parse_primitive_forms(const std::vector<SExpr>& forms);

}  // namespace

ProtocolSpec parse_protocol(std::string_view text) {
  auto forms = read_sexprs(text);
  if (forms.empty()) throw ParseError({{1, 1, "missing protocol form"}});
  const SExpr& f = forms[0];
  if (!f.is_form("protocol")) throw ParseError({{f.line, f.column, "missing protocol form"}});
  Issues issues;
  for (std::size_t i = 1; i < forms.size(); ++i) {
    issue(issues, forms[i], "unexpected form after the protocol");
  }

  ProtocolSpec spec;
  if (f.items.size() < 2 || !f.items[1].is_symbol()) {
    issue(issues, f, "protocol needs a name");
  } else {
    spec.name = f.items[1].atom;
  }
  for (std::size_t i = 2; i < f.items.size(); ++i) {
    const SExpr& d = f.items[i];
    if (!d.is_list || d.items.empty() || !d.items[0].is_symbol()) {
      issue(issues, d, "expected a declaration");
      continue;
    }
    const std::string& head = d.items[0].atom;
    if (head == "principal") {
      if (d.items.size() != 3 || !d.items[1].is_symbol() || !d.items[2].is_symbol()) {
        issue(issues, d, "expected (principal <name> honest|adversary)");
        continue;
      }
      auto kind = kind_word(d.items[2].atom);
      if (!kind) {
        issue(issues, d.items[2], "principal kind must be honest or adversary");
        continue;
      }
      spec.principals.push_back({d.items[1].atom, *kind});
    } else if (head == "atom") {
      symbols_after_head(d, spec.atoms, issues);
    } else if (head == "use") {
      symbols_after_head(d, spec.primitives, issues);
    } else if (head == "knows") {
      if (d.items.size() != 3 || !d.items[1].is_symbol()) {
        issue(issues, d, "expected (knows <principal> <term>)");
        continue;
      }
      spec.facts.push_back({d.items[1].atom, d.items[2]});
    } else if (head == "rule") {
      spec.rules.push_back(parse_rule(d, issues));
    } else if (head == "query") {
      if (d.items.size() < 3 || !d.items[1].is_symbol()) {
        issue(issues, d, "expected (query <name> [(forall ...)] <term>)");
        continue;
      }
      QueryDecl q;
      q.name = d.items[1].atom;
      std::size_t j = 2;
      if (d.items[j].is_form("forall")) q.roles = parse_forall(d.items[j++], issues);
      if (j + 1 != d.items.size()) {
        issue(issues, d, "query expects exactly one target term");
        continue;
      }
      q.target = d.items[j];
      spec.queries.push_back(std::move(q));
    } else {
      issue(issues, d.items[0], "unknown declaration '" + head + "'");
    }
  }
  if (issues.empty()) issues = check_spec(spec, f);
  if (!issues.empty()) throw ParseError(std::move(issues));
  return spec;
}

void validate(const ProtocolSpec& spec) {
  SExpr anchor;
  auto issues = check_spec(spec, anchor);
  if (!issues.empty()) throw ParseError(std::move(issues));
}

SExpr to_sexpr(const ProtocolSpec& spec) {
  std::vector<SExpr> items{sym("protocol"), sym(spec.name)};
  for (const auto& p : spec.principals) {
    items.push_back(SExpr::list({sym("principal"), sym(p.name), sym(std::string(kind_name(p.kind)))}));
  }
  auto names_form = [&](const char* head, const std::vector<std::string>& names) {
    if (names.empty()) return;
    std::vector<SExpr> f{sym(head)};
    for (const auto& n : names) f.push_back(sym(n));
    items.push_back(SExpr::list(std::move(f)));
  };
  names_form("atom", spec.atoms);
  names_form("use", spec.primitives);
  for (const auto& f : spec.facts) {
    items.push_back(SExpr::list({sym("knows"), sym(f.principal), f.term}));
  }
  for (const auto& r : spec.rules) {
    std::vector<SExpr> f{sym("rule")};
    if (!r.name.empty()) f.push_back(sym(r.name));
    if (!r.roles.empty()) f.push_back(roles_sexpr(r.roles));
    if (r.teller) f.push_back(SExpr::list({sym("teller"), sym(*r.teller)}));
    if (!r.premises.empty()) {
      std::vector<SExpr> p{sym("premise")};
      p.insert(p.end(), r.premises.begin(), r.premises.end());
      f.push_back(SExpr::list(std::move(p)));
    }
    f.push_back(SExpr::list({sym("conclude"), r.conclusion}));
    items.push_back(SExpr::list(std::move(f)));
  }
  for (const auto& q : spec.queries) {
    std::vector<SExpr> f{sym("query"), sym(q.name)};
    if (!q.roles.empty()) f.push_back(roles_sexpr(q.roles));
    f.push_back(q.target);
    items.push_back(SExpr::list(std::move(f)));
  }
  return SExpr::list(std::move(items));
}

std::string print_protocol(const ProtocolSpec& spec) { return pretty_sexpr(to_sexpr(spec)) + "\n"; }

std::map<std::string, ProtocolSpec> builtin_protocols() {
  ProtocolSpec ns;
  ns.name = "ns";
  ns.principals = {{"a", PrincipalKind::Honest},
                   {"b", PrincipalKind::Honest},
                   {"o", PrincipalKind::Adversary}};
  ns.primitives = {"e", "t", "n"};
  for (const char* t : {"(sk o)", "(pk (sk a))", "(pk (sk b))", "(pk (sk o))", "(id a)", "(id b)",
                        "(id o)", "eps"}) {
    ns.facts.push_back({"o", sx(t)});
  }
  const std::vector<std::string> honest{"a", "b"}, everyone{"a", "b", "o"};

  RuleDecl ns1;
  ns1.name = "ns1";
  ns1.roles = {{"p", honest}, {"p2", everyone}};
  ns1.teller = "p";
  ns1.conclusion = sx("(enc (pk (sk p2)) (pair (id p) (nonce eps (id p))))");

  RuleDecl ns2;
  ns2.name = "ns2";
  ns2.roles = {{"p2", honest}, {"p", everyone}};
  ns2.teller = "p2";
  ns2.premises = {sx("(enc (pk (sk p2)) (pair (id p) (var v)))")};
  ns2.conclusion =
      sx("(enc (pk (sk p)) (pair (var v) (nonce (enc (pk (sk p2)) (pair (id p) (var v))) (id p2))))");

  RuleDecl ns3;
  ns3.name = "ns3";
  ns3.roles = {{"p", honest}, {"p2", everyone}};
  ns3.teller = "p";
  ns3.premises = {sx("(enc (pk (sk p)) (pair (nonce eps (id p)) (var v)))")};
  ns3.conclusion = sx("(enc (pk (sk p2)) (var v))");

  ns.rules = {ns1, ns2, ns3};
  ns.queries = {{"responder-nonce-secrecy", {},
                 sx("(nonce (enc (pk (sk b)) (pair (id a) (nonce eps (id a)))) (id b))")}};

  // Lowe's fix: the responder names itself in message 2 and the initiator
  // only answers when that name is the peer it started with.
  ProtocolSpec lowe = ns;
  lowe.name = "ns-lowe";
  lowe.rules[1].conclusion = sx(
      "(enc (pk (sk p)) (pair (var v) (nonce (enc (pk (sk p2)) (pair (id p) (var v))) (id p2)) "
      "(id p2)))");
  lowe.rules[2].premises = {sx("(enc (pk (sk p)) (pair (nonce eps (id p)) (var v) (id p2)))")};

  return {{ns.name, ns}, {lowe.name, lowe}};
}

ProtocolSpec load_protocol(const std::string& name_or_path) {
  auto builtins = builtin_protocols();
  if (auto it = builtins.find(name_or_path); it != builtins.end()) return it->second;
  std::ifstream in(name_or_path);
  if (!in) {
    throw ValidationError("no builtin protocol or readable file named '" + name_or_path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_protocol(ss.str());
}

CompiledProtocol compile(const ProtocolSpec& spec) {
  validate(spec);
  CompiledProtocol out;
  Issues issues;  // stays empty after validate
  const std::map<std::string, std::string> no_roles;

  TermSet initial;
  for (const auto& f : spec.facts) {
    if (find_principal(spec, f.principal)->kind != PrincipalKind::Adversary) continue;
    initial.insert(*Resolver(spec, no_roles, issues).resolve(f.term));
  }

  std::string default_teller;
  for (const auto& p : spec.principals) {
    if (p.kind == PrincipalKind::Honest) {
      default_teller = p.name;
      break;
    }
  }

  std::vector<ProjectedRule> protocol;
  for (std::size_t i = 0; i < spec.rules.size(); ++i) {
    const RuleDecl& decl = spec.rules[i];
    const std::string id = decl.name.empty() ? "rule" + std::to_string(i + 1) : decl.name;
    for (const auto& env : expand_roles(decl.roles)) {
      std::string teller = decl.teller.value_or(default_teller);
      if (auto it = env.find(teller); it != env.end()) teller = it->second;
      const Principal* tp = find_principal(spec, teller);
      if (!tp || tp->kind != PrincipalKind::Honest) continue;

      Resolver r(spec, env, issues);
      ProjectedRule pr;
      pr.id = id;
      for (const auto& p : decl.premises) pr.premises.push_back(*r.resolve(p));
      pr.conclusion = *r.resolve(decl.conclusion);
      pr.origin = teller;
      pr.kind = RuleKind::Protocol;
      pr.roles = env;

      PatternRule full;
      full.id = id;
      full.teller = *tp;
      full.taught = pr.conclusion;
      full.learner = Principal{std::string(kOscar), PrincipalKind::Adversary};
      full.premises = pr.premises;
      for (Term p : pr.premises) {
        auto v = variables(p);
        full.quantified_vars.insert(v.begin(), v.end());
      }
      full.roles = env;
      out.pattern_rules.push_back(std::move(full));
      protocol.push_back(std::move(pr));
    }
  }

  for (const auto& q : spec.queries) {
    auto& targets = out.queries[q.name];
    for (const auto& env : expand_roles(q.roles)) {
      targets.push_back(*Resolver(spec, env, issues).resolve(q.target));
    }
  }
  out.problem = make_problem(std::move(initial), std::move(protocol), spec.primitives);
  return out;
}

nlohmann::json to_json(const ProtocolSpec& spec) {
  auto roles_json = [](const std::vector<RoleQuantifier>& roles) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& q : roles) j.push_back({{"var", q.var}, {"in", q.domain}});
    return j;
  };
  nlohmann::json j;
  j["name"] = spec.name;
  j["principals"] = nlohmann::json::array();
  for (const auto& p : spec.principals) {
    j["principals"].push_back({{"name", p.name}, {"kind", std::string(kind_name(p.kind))}});
  }
  j["atoms"] = spec.atoms;
  j["primitives"] = spec.primitives;
  j["knows"] = nlohmann::json::array();
  for (const auto& f : spec.facts) {
    j["knows"].push_back({{"principal", f.principal}, {"term", print_sexpr(f.term)}});
  }
  j["rules"] = nlohmann::json::array();
  for (const auto& r : spec.rules) {
    nlohmann::json rj{{"name", r.name}, {"forall", roles_json(r.roles)}};
    if (r.teller) rj["teller"] = *r.teller;
    rj["premises"] = nlohmann::json::array();
    for (const auto& p : r.premises) rj["premises"].push_back(print_sexpr(p));
    rj["conclusion"] = print_sexpr(r.conclusion);
    j["rules"].push_back(std::move(rj));
  }
  j["queries"] = nlohmann::json::array();
  for (const auto& q : spec.queries) {
    j["queries"].push_back(
        {{"name", q.name}, {"forall", roles_json(q.roles)}, {"target", print_sexpr(q.target)}});
  }
  return j;
}

// ---- primitive spec files --------------------------------------------------

namespace {

Term schema_term(const SExpr& e, Issues& issues) {
  if (e.is_symbol()) return e.atom == "eps" ? eps() : var(e.atom);
  if (e.items.empty() || !e.items[0].is_symbol()) {
    issue(issues, e, "expected a schema term");
    return eps();
  }
  Tag tag;
  const std::string& head = e.items[0].atom;
  if (head == "id" && e.items.size() == 2 && e.items[1].is_symbol()) return identity(e.items[1].atom);
  if (!tag_from_keyword(head, tag) || is_leaf(tag)) {
    issue(issues, e.items[0], "unknown constructor '" + head + "'");
    return eps();
  }
  if (e.items.size() != tag_arity(tag) + 1) {
    issue(issues, e, head + " expects " + std::to_string(tag_arity(tag)) + " arguments");
    return eps();
  }
  std::vector<Term> kids;
  for (std::size_t i = 1; i < e.items.size(); ++i) kids.push_back(schema_term(e.items[i], issues));
  return make_term(tag, {}, kids);
}

std::optional<std::size_t> index_of(const SExpr& e, Issues& issues) {
  if (e.is_symbol()) {
    try {
      std::size_t used = 0;
      long v = std::stol(e.atom, &used);
      if (used == e.atom.size() && v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  issue(issues, e, "expected a positive position");
  return std::nullopt;
}

std::vector<PrimitiveSpec> parse_primitive_forms(const std::vector<SExpr>& forms) {
  Issues issues;
  std::vector<PrimitiveSpec> out;
  for (const auto& f : forms) {
    if (!f.is_form("primitive") || f.items.size() < 2 || !f.items[1].is_symbol()) {
      issue(issues, f, "expected (primitive <name> ...)");
      continue;
    }
    PrimitiveSpec spec;
    spec.principal = f.items[1].atom;
    for (std::size_t i = 2; i < f.items.size(); ++i) {
      const SExpr& c = f.items[i];
      if (c.is_form("schema")) {
        for (std::size_t j = 1; j < c.items.size(); ++j) {
          spec.schema.push_back(schema_term(c.items[j], issues));
        }
      } else if (c.is_form("compose") || c.is_form("decompose")) {
        auto& target = c.is_form("compose") ? spec.composing : spec.decomposing;
        for (std::size_t j = 1; j < c.items.size(); ++j) {
          if (auto k = index_of(c.items[j], issues)) target.insert(*k);
        }
      } else if (c.is_form("w")) {
        if (c.items.size() != 3 || !c.items[2].is_list) {
          issue(issues, c, "expected (w <position> (<position> ...))");
          continue;
        }
        auto k = index_of(c.items[1], issues);
        std::set<std::size_t> w;
        for (const auto& x : c.items[2].items) {
          if (auto j = index_of(x, issues)) w.insert(*j);
        }
        if (k) spec.premise_sets[*k] = std::move(w);
      } else if (c.is_form("guard")) {
        Tag tag;
        if (c.items.size() != 3 || !c.items[1].is_symbol() || !c.items[2].is_symbol() ||
            !tag_from_keyword(c.items[2].atom, tag)) {
          issue(issues, c, "expected (guard <variable> <constructor>)");
          continue;
        }
        spec.guards.push_back({c.items[1].atom, tag});
      } else {
        issue(issues, c, "expected schema, compose, decompose, w or guard");
      }
    }
    spec.arity = spec.schema.size();
    out.push_back(std::move(spec));
  }
  if (out.empty() && issues.empty()) issues.push_back({1, 1, "no primitive form"});
  if (!issues.empty()) throw ParseError(std::move(issues));
  return out;
}

std::string schema_text(Term t) {
  switch (t.tag()) {
    case Tag::Var: return std::string(t.name());
    case Tag::Epsilon: return "eps";
    case Tag::Identity: return "(id " + std::string(t.name()) + ")";
    default: break;
  }
  std::string s = "(" + std::string(tag_keyword(t.tag()));
  for (Term c : t.children()) s += " " + schema_text(c);
  return s + ")";
}

}  // namespace

std::vector<PrimitiveSpec> parse_primitive_specs(std::string_view text) {
  return parse_primitive_forms(read_sexprs(text));
}

std::string print_primitive_spec(const PrimitiveSpec& spec) {
  std::ostringstream os;
  os << "(primitive " << spec.principal << "\n  (schema";
  for (Term t : spec.schema) os << ' ' << schema_text(t);
  os << ")\n  (compose";
  for (auto i : spec.composing) os << ' ' << i;
  os << ")";
  if (!spec.decomposing.empty()) {
    os << "\n  (decompose";
    for (auto i : spec.decomposing) os << ' ' << i;
    os << ")";
  }
  for (const auto& [i, w] : spec.premise_sets) {
    os << "\n  (w " << i << " (";
    bool first = true;
    for (auto j : w) {
      os << (first ? "" : " ") << j;
      first = false;
    }
    os << "))";
  }
  for (const auto& g : spec.guards) os << "\n  (guard " << g.var << ' ' << tag_keyword(g.excluded) << ")";
  os << ")\n";
  return os.str();
}

}  // namespace kflow
