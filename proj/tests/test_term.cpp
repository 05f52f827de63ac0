#include <doctest.h>

#include <algorithm>
#include <thread>

#include "kflow/error.hpp"
#include "kflow/term.hpp"

using namespace kflow;

namespace {

// Independent count of the enumerated universe: a leaves, u unary
// constructors, b ordered binary ones and one optional unordered pair.
std::size_t universe_count(std::size_t a, std::size_t u, std::size_t b, bool set2, int depth) {
  std::size_t c = a;
  for (int d = 1; d <= depth; ++d) c = a + u * c + b * c * c + (set2 ? c * (c + 1) / 2 : 0);
  return c;
}

}  // namespace

TEST_SUITE("term") {
  TEST_CASE("structurally equal terms share one handle") {
    Term a1 = enc(pk(atom("s")), pair(atom("x"), identity("a")));
    std::size_t size = intern_table_size();
    Term a2 = enc(pk(atom("s")), pair(atom("x"), identity("a")));
    CHECK(a1 == a2);
    CHECK(a1.id() == a2.id());
    CHECK(intern_table_size() == size);
    CHECK(enc(atom("s"), atom("x")) != enc(atom("x"), atom("s")));
    CHECK(atom("a") != identity("a"));
  }

  TEST_CASE("2-sets are unordered, pairs are not") {
    CHECK(set2(atom("a"), atom("b")) == set2(atom("b"), atom("a")));
    CHECK(pair(atom("a"), atom("b")) != pair(atom("b"), atom("a")));
  }

  TEST_CASE("constructor arity and null children are rejected") {
    std::vector<Term> one{atom("a")};
    CHECK_THROWS_AS(make_term(Tag::Enc, {}, one), ConstructionError);
    std::vector<Term> null_kid{Term{}};
    CHECK_THROWS_AS(make_term(Tag::Hash, {}, null_kid), ConstructionError);
    CHECK_THROWS_AS(make_term(Tag::Atom, "", {}), ConstructionError);
  }

  TEST_CASE("depth and groundness") {
    CHECK(atom("a").depth() == 0);
    CHECK(eps().depth() == 0);
    Term t = nonce(enc(pk(atom("skb")), pair(identity("a"), nonce(eps(), identity("a")))), identity("b"));
    CHECK(t.depth() == 4);
    CHECK(t.ground());
    CHECK_FALSE(pair(var("v"), atom("a")).ground());
    CHECK(variables(pair(var("v"), hash(var("w")))) == std::set<std::string>{"v", "w"});
  }

  TEST_CASE("subterms, leaves and constructors") {
    Term t = enc(pk(atom("s")), pair(atom("x"), atom("x")));
    CHECK(subterms(t).size() == 5);  // t, pk s, s, pair, x
    CHECK(leaves(t) == TermSet{atom("s"), atom("x")});
    CHECK(constructors(t) == std::set<Tag>{Tag::Enc, Tag::PubKey, Tag::Pair});
  }

  TEST_CASE("canonical order ranks constructors first") {
    std::vector<Term> ts{pair(atom("a"), atom("a")), atom("b"), eps(), pk(atom("a")), atom("a"),
                         identity("a")};
    std::sort(ts.begin(), ts.end());
    CHECK(ts[0] == eps());
    CHECK(ts[1] == atom("a"));
    CHECK(ts[2] == atom("b"));
    CHECK(ts[3] == identity("a"));
    CHECK(ts[4] == pk(atom("a")));
    CHECK(ts[5] == pair(atom("a"), atom("a")));
  }

  TEST_CASE("order is a strict total order on a sample") {
    auto u = enumerate_universe({atom("a"), atom("b")}, {Tag::Hash, Tag::Pair}, 2);
    for (Term x : u) {
      for (Term y : u) {
        bool lt = x < y;
        bool gt = y < x;
        CHECK((x == y) == (!lt && !gt));
        CHECK_FALSE((lt && gt));
      }
    }
  }

  TEST_CASE("s-expression round trip") {
    Term t = nonce(enc(pk(atom("skb")), pair(identity("a"), nonce(eps(), identity("a")))), identity("b"));
    CHECK(to_sexpr(t) == "(nonce (enc (pk skb) (pair (id a) (nonce eps (id a)))) (id b))");
    CHECK(term_from_sexpr(to_sexpr(t)) == t);
    CHECK(term_from_sexpr("(set b a)") == set2(atom("a"), atom("b")));
    CHECK_THROWS_AS(term_from_sexpr("(enc a)"), ParseError);
    CHECK_THROWS_AS(term_from_sexpr("(frob a)"), ParseError);
  }

  TEST_CASE("json round trips") {
    Term t = rule_val(pair(var("x"), atom("k")), sig(atom("s"), hash(var("x"))));
    CHECK(term_from_json(to_json(t)) == t);
    CHECK(term_from_graph_json(to_graph_json(t)) == t);
    // Shared subterms are stored once in the graph form.
    Term shared = pair(hash(atom("k")), hash(atom("k")));
    CHECK(to_graph_json(shared)["nodes"].size() == 3);
    CHECK_THROWS_AS(term_from_json(nlohmann::json{{"tag", "frob"}}), ValidationError);
  }

  TEST_CASE("a value equal to its own encryption is rejected") {
    // x = E_s(x): node 1 is enc(s, node 1).
    auto cyclic = nlohmann::json::parse(R"({"nodes":[{"tag":"atom","name":"s"},
                                            {"tag":"enc","args":[0,1]}],"root":1})");
    CHECK_THROWS_WITH_AS(term_from_graph_json(cyclic), doctest::Contains("cyclic"), ValidationError);
    auto dangling = nlohmann::json::parse(R"({"nodes":[{"tag":"hash","args":[5]}],"root":0})");
    CHECK_THROWS_AS(term_from_graph_json(dangling), ValidationError);
  }

  TEST_CASE("universe enumeration matches the counting formula") {
    TermSet two{atom("a"), atom("b")};
    TermSet three{atom("a"), atom("b"), atom("c")};
    for (int d = 0; d <= 3; ++d) {
      CHECK(enumerate_universe(two, {Tag::Hash}, d).size() == universe_count(2, 1, 0, false, d));
      CHECK(enumerate_universe(two, {Tag::Pair}, d).size() == universe_count(2, 0, 1, false, d));
      CHECK(enumerate_universe(two, {Tag::Set2}, d).size() == universe_count(2, 0, 0, true, d));
    }
    for (int d = 0; d <= 2; ++d) {
      CHECK(enumerate_universe(three, {Tag::PubKey, Tag::Enc, Tag::Set2}, d).size() ==
            universe_count(3, 1, 1, true, d));
    }
  }

  TEST_CASE("enumeration respects depth and cap") {
    auto u = enumerate_universe({atom("a")}, {Tag::Pair, Tag::Hash}, 3);
    CHECK(std::all_of(u.begin(), u.end(), [](Term t) { return t.depth() <= 3; }));
    CHECK(std::is_sorted(u.begin(), u.end()));
    CHECK_THROWS_AS(enumerate_universe({atom("a"), atom("b")}, {Tag::Pair}, 3, 100), ResourceError);
  }

  TEST_CASE("interning is safe across threads") {
    std::vector<std::vector<Term>> built(4);
    std::vector<std::thread> pool;
    for (int i = 0; i < 4; ++i) {
      pool.emplace_back([&built, i] {
        for (int j = 0; j < 200; ++j) {
          built[i].push_back(pair(atom("t" + std::to_string(j)), hash(atom("t" + std::to_string(j)))));
        }
      });
    }
    for (auto& t : pool) t.join();
    for (int i = 1; i < 4; ++i) CHECK(built[i] == built[0]);
  }
}
