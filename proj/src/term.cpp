#include "kflow/term.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "kflow/error.hpp"
#include "kflow/sexpr.hpp"

namespace kflow {

struct TermNode {
  Tag tag;
  std::string name;
  std::array<Term, 2> kids;
  std::uint8_t arity;
  std::uint32_t id;
  int depth;
  bool ground;
};

namespace {

struct Keyword {
  Tag tag;
  std::string_view word;
  std::size_t arity;
};

constexpr std::array<Keyword, 12> kKeywords{{
    {Tag::Epsilon, "eps", 0},
    {Tag::Atom, "atom", 0},
    {Tag::Identity, "id", 0},
    {Tag::Var, "var", 0},
    {Tag::PubKey, "pk", 1},
    {Tag::Hash, "hash", 1},
    {Tag::Enc, "enc", 2},
    {Tag::Sig, "sig", 2},
    {Tag::Nonce, "nonce", 2},
    {Tag::Pair, "pair", 2},
    {Tag::Set2, "set", 2},
    {Tag::RuleVal, "rule", 2},
}};

struct Key {
  Tag tag;
  std::string name;
  std::uint32_t a;
  std::uint32_t b;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::size_t h = std::hash<std::string>{}(k.name);
    h ^= static_cast<std::size_t>(k.tag) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= k.a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= k.b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace

class TermStore {
 public:
  static TermStore& global() {
    static TermStore store;
    return store;
  }

  Term intern(Tag tag, std::string name, Term a, Term b, std::uint8_t arity) {
    Key key{tag, std::move(name), a ? a.id() + 1 : 0, b ? b.id() + 1 : 0};
    {
      std::shared_lock lock(mu_);
      auto it = index_.find(key);
      if (it != index_.end()) return Term(it->second);
    }
    std::unique_lock lock(mu_);
    auto it = index_.find(key);
    if (it != index_.end()) return Term(it->second);
    TermNode node{tag, key.name, {a, b}, arity, static_cast<std::uint32_t>(nodes_.size()), 0,
                  tag != Tag::Var};
    for (std::uint8_t i = 0; i < arity; ++i) {
      const TermNode* kid = node.kids[i].node_;
      node.depth = std::max(node.depth, kid->depth + 1);
      node.ground = node.ground && kid->ground;
    }
    nodes_.push_back(std::move(node));
    const TermNode* stored = &nodes_.back();
    index_.emplace(std::move(key), stored);
    return Term(stored);
  }

  std::size_t size() {
    std::shared_lock lock(mu_);
    return nodes_.size();
  }

 private:
  std::shared_mutex mu_;
  std::deque<TermNode> nodes_;  // stable addresses
  std::unordered_map<Key, const TermNode*, KeyHash> index_;
};

Tag Term::tag() const { return node_->tag; }
const std::string& Term::name() const { return node_->name; }
std::size_t Term::arity() const { return node_->arity; }
Term Term::child(std::size_t i) const { return node_->kids[i]; }
std::span<const Term> Term::children() const {
  return {node_->kids.data(), node_->arity};
}
std::uint32_t Term::id() const { return node_->id; }
int Term::depth() const { return node_->depth; }
bool Term::ground() const { return node_->ground; }

std::strong_ordering operator<=>(Term a, Term b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (!a.node_) return std::strong_ordering::less;
  if (!b.node_) return std::strong_ordering::greater;
  if (auto c = a.tag() <=> b.tag(); c != 0) return c;
  if (auto c = a.name().compare(b.name()); c != 0) {
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (auto c = a.child(i) <=> b.child(i); c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::string_view tag_keyword(Tag tag) { return kKeywords[static_cast<std::size_t>(tag)].word; }

bool tag_from_keyword(std::string_view word, Tag& out) {
  for (const auto& k : kKeywords) {
    if (k.word == word) {
      out = k.tag;
      return true;
    }
  }
  return false;
}

std::size_t tag_arity(Tag tag) { return kKeywords[static_cast<std::size_t>(tag)].arity; }

bool is_leaf(Tag tag) { return tag_arity(tag) == 0; }

Term make_term(Tag tag, std::string name, std::span<const Term> children) {
  if (children.size() != tag_arity(tag)) {
    throw ConstructionError(std::string(tag_keyword(tag)) + " expects " +
                            std::to_string(tag_arity(tag)) + " children, got " +
                            std::to_string(children.size()));
  }
  for (Term c : children) {
    if (!c) throw ConstructionError("null child for " + std::string(tag_keyword(tag)));
  }
  bool named = tag == Tag::Atom || tag == Tag::Identity || tag == Tag::Var;
  if (named && name.empty()) {
    throw ConstructionError(std::string(tag_keyword(tag)) + " requires a name");
  }
  if (!named) name.clear();
  Term a = children.size() > 0 ? children[0] : Term{};
  Term b = children.size() > 1 ? children[1] : Term{};
  if (tag == Tag::Set2 && b < a) std::swap(a, b);
  return TermStore::global().intern(tag, std::move(name), a, b,
                                    static_cast<std::uint8_t>(children.size()));
}

namespace {
Term make1(Tag tag, Term a) {
  std::array<Term, 1> kids{a};
  return make_term(tag, {}, kids);
}
Term make2(Tag tag, Term a, Term b) {
  std::array<Term, 2> kids{a, b};
  return make_term(tag, {}, kids);
}
}  // namespace

Term eps() { return make_term(Tag::Epsilon, {}, {}); }
Term atom(std::string name) { return make_term(Tag::Atom, std::move(name), {}); }
Term identity(std::string principal) {
  return make_term(Tag::Identity, std::move(principal), {});
}
Term var(std::string name) { return make_term(Tag::Var, std::move(name), {}); }
Term pk(Term secret) { return make1(Tag::PubKey, secret); }
Term hash(Term x) { return make1(Tag::Hash, x); }
Term enc(Term key, Term payload) { return make2(Tag::Enc, key, payload); }
Term sig(Term key, Term payload) { return make2(Tag::Sig, key, payload); }
Term nonce(Term seed, Term id) { return make2(Tag::Nonce, seed, id); }
Term pair(Term a, Term b) { return make2(Tag::Pair, a, b); }
Term set2(Term a, Term b) { return make2(Tag::Set2, a, b); }
Term rule_val(Term premise, Term conclusion) { return make2(Tag::RuleVal, premise, conclusion); }

bool is_ground(Term t) { return t.ground(); }

namespace {
void collect_subterms(Term t, TermSet& out) {
  if (!out.insert(t).second) return;
  for (Term c : t.children()) collect_subterms(c, out);
}
}  // namespace

TermSet subterms(Term t) {
  TermSet out;
  collect_subterms(t, out);
  return out;
}

std::set<std::string> variables(Term t) {
  std::set<std::string> out;
  if (t.ground()) return out;
  for (Term s : subterms(t)) {
    if (s.tag() == Tag::Var) out.insert(s.name());
  }
  return out;
}

TermSet leaves(Term t) {
  TermSet out;
  for (Term s : subterms(t)) {
    if (s.arity() == 0 && s.tag() != Tag::Var) out.insert(s);
  }
  return out;
}

std::set<Tag> constructors(Term t) {
  std::set<Tag> out;
  for (Term s : subterms(t)) {
    if (s.arity() > 0) out.insert(s.tag());
  }
  return out;
}

std::size_t intern_table_size() { return TermStore::global().size(); }

std::string to_sexpr(Term t) {
  switch (t.tag()) {
    case Tag::Epsilon:
      return "eps";
    case Tag::Atom:
      return t.name();
    case Tag::Identity:
      return "(id " + t.name() + ")";
    case Tag::Var:
      return "(var " + t.name() + ")";
    default:
      break;
  }
  std::string out = "(";
  out += tag_keyword(t.tag());
  for (Term c : t.children()) {
    out += ' ';
    out += to_sexpr(c);
  }
  out += ')';
  return out;
}

namespace {

Term term_from_sexpr_node(const SExpr& e) {
  auto fail = [&](const std::string& msg) -> Term {
    throw ParseError({{e.line, e.column, msg}});
  };
  if (e.is_symbol()) {
    if (e.atom == "eps") return eps();
    Tag ignored;
    if (tag_from_keyword(e.atom, ignored)) return fail("keyword '" + e.atom + "' used as atom");
    return atom(e.atom);
  }
  if (e.items.empty() || !e.items[0].is_symbol()) return fail("expected a constructor form");
  const std::string& head = e.items[0].atom;
  Tag tag;
  if (!tag_from_keyword(head, tag) || tag == Tag::Epsilon) {
    return fail("unknown constructor '" + head + "'");
  }
  if (tag == Tag::Atom || tag == Tag::Identity || tag == Tag::Var) {
    if (e.items.size() != 2 || !e.items[1].is_symbol()) return fail(head + " expects one name");
    return make_term(tag, e.items[1].atom, {});
  }
  if (e.items.size() != tag_arity(tag) + 1) {
    return fail(head + " expects " + std::to_string(tag_arity(tag)) + " arguments");
  }
  std::vector<Term> kids;
  for (std::size_t i = 1; i < e.items.size(); ++i) kids.push_back(term_from_sexpr_node(e.items[i]));
  return make_term(tag, {}, kids);
}

}  // namespace

Term term_from_sexpr(std::string_view text) {
  auto forms = read_sexprs(text);
  if (forms.size() != 1) throw ParseError({{1, 1, "expected exactly one term"}});
  return term_from_sexpr_node(forms[0]);
}

nlohmann::json to_json(Term t) {
  nlohmann::json j;
  j["tag"] = std::string(tag_keyword(t.tag()));
  if (t.arity() == 0) {
    if (t.tag() != Tag::Epsilon) j["name"] = t.name();
    return j;
  }
  j["args"] = nlohmann::json::array();
  for (Term c : t.children()) j["args"].push_back(to_json(c));
  return j;
}

namespace {
Tag json_tag(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("tag") || !j["tag"].is_string()) {
    throw ValidationError("term node without a tag");
  }
  Tag tag;
  if (!tag_from_keyword(j["tag"].get<std::string>(), tag)) {
    throw ValidationError("unknown term tag '" + j["tag"].get<std::string>() + "'");
  }
  return tag;
}

std::string json_name(const nlohmann::json& j, Tag tag) {
  if (tag == Tag::Epsilon) return {};
  if (!j.contains("name") || !j["name"].is_string()) {
    throw ValidationError(std::string(tag_keyword(tag)) + " node without a name");
  }
  return j["name"].get<std::string>();
}
}  // namespace

Term term_from_json(const nlohmann::json& j) {
  Tag tag = json_tag(j);
  if (is_leaf(tag)) return make_term(tag, json_name(j, tag), {});
  if (!j.contains("args") || !j["args"].is_array()) {
    throw ValidationError(std::string(tag_keyword(tag)) + " node without args");
  }
  std::vector<Term> kids;
  for (const auto& a : j["args"]) kids.push_back(term_from_json(a));
  return make_term(tag, {}, kids);
}

nlohmann::json to_graph_json(Term root) {
  // Post-order numbering; the root is the last node.
  std::map<Term, std::size_t> index;
  nlohmann::json nodes = nlohmann::json::array();
  std::function<std::size_t(Term)> visit = [&](Term t) -> std::size_t {
    if (auto it = index.find(t); it != index.end()) return it->second;
    nlohmann::json n;
    n["tag"] = std::string(tag_keyword(t.tag()));
    if (t.arity() == 0) {
      if (t.tag() != Tag::Epsilon) n["name"] = t.name();
    } else {
      n["args"] = nlohmann::json::array();
      for (Term c : t.children()) n["args"].push_back(visit(c));
    }
    std::size_t at = nodes.size();
    nodes.push_back(std::move(n));
    index.emplace(t, at);
    return at;
  };
  std::size_t r = visit(root);
  return {{"nodes", nodes}, {"root", r}};
}

Term term_from_graph_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array() || !j.contains("root") ||
      !j["root"].is_number_unsigned()) {
    throw ValidationError("graph term needs 'nodes' array and unsigned 'root'");
  }
  const auto& nodes = j["nodes"];
  const std::size_t n = nodes.size();
  enum class Mark { Fresh, Active, Done };
  std::vector<Mark> mark(n, Mark::Fresh);
  std::vector<Term> built(n);

  std::function<Term(std::size_t)> build = [&](std::size_t i) -> Term {
    if (i >= n) throw ValidationError("node reference " + std::to_string(i) + " out of range");
    if (mark[i] == Mark::Done) return built[i];
    if (mark[i] == Mark::Active) {
      throw ValidationError("cyclic term: node " + std::to_string(i) +
                            " is its own subterm; the value algebra is acyclic");
    }
    mark[i] = Mark::Active;
    const auto& node = nodes[i];
    Tag tag = json_tag(node);
    Term t;
    if (is_leaf(tag)) {
      t = make_term(tag, json_name(node, tag), {});
    } else {
      if (!node.contains("args") || !node["args"].is_array()) {
        throw ValidationError("node " + std::to_string(i) + " without args");
      }
      std::vector<Term> kids;
      for (const auto& a : node["args"]) {
        if (!a.is_number_unsigned()) throw ValidationError("child reference must be an index");
        kids.push_back(build(a.get<std::size_t>()));
      }
      try {
        t = make_term(tag, {}, kids);
      } catch (const ConstructionError& e) {
        throw ValidationError(e.what());
      }
    }
    mark[i] = Mark::Done;
    built[i] = t;
    return t;
  };
  return build(j["root"].get<std::size_t>());
}

std::vector<Term> enumerate_universe(const TermSet& atoms, const std::set<Tag>& ctors,
                                     int max_depth, std::size_t cap) {
  for (Term a : atoms) {
    if (!a.ground() || a.arity() != 0) {
      throw ConstructionError("universe atoms must be ground leaves: " + to_sexpr(a));
    }
  }
  TermSet all(atoms.begin(), atoms.end());
  std::vector<Term> frontier(atoms.begin(), atoms.end());  // terms of exactly the last depth
  auto check_cap = [&] {
    if (all.size() > cap) {
      throw ResourceError("universe exceeds cap of " + std::to_string(cap) + " terms",
                          all.size());
    }
  };
  check_cap();
  for (int d = 1; d <= max_depth && !frontier.empty(); ++d) {
    std::vector<Term> previous(all.begin(), all.end());
    TermSet fresh_set(frontier.begin(), frontier.end());
    std::vector<Term> next;
    auto add = [&](Term t) {
      if (all.insert(t).second) {
        next.push_back(t);
        check_cap();
      }
    };
    for (Tag tag : ctors) {
      if (is_leaf(tag)) continue;
      if (tag_arity(tag) == 1) {
        for (Term x : frontier) add(make1(tag, x));
        continue;
      }
      // Binary: at least one child from the previous frontier.
      for (Term x : previous) {
        bool x_fresh = fresh_set.count(x) > 0;
        for (Term y : previous) {
          if (!x_fresh && !fresh_set.count(y)) continue;
          add(make2(tag, x, y));
        }
      }
    }
    frontier = std::move(next);
  }
  return {all.begin(), all.end()};
}

}  // namespace kflow
