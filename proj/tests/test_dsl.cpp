#include <doctest.h>

#include <fstream>
#include <sstream>

#include "kflow/dsl.hpp"
#include "kflow/error.hpp"

using namespace kflow;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(KFLOW_SOURCE_DIR) + "/" + rel);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<ParseIssue> issues_of(std::string_view text) {
  try {
    parse_protocol(text);
  } catch (const ParseError& e) {
    return e.issues();
  }
  return {};
}

bool has_issue(const std::vector<ParseIssue>& issues, const std::string& fragment) {
  for (const auto& i : issues) {
    if (i.message.find(fragment) != std::string::npos) return true;
  }
  return false;
}

constexpr std::string_view kTiny = R"(
(protocol tiny
  (principal a honest)
  (principal o adversary)
  (atom k m)
  (use t)
  (knows o k)
  (rule r1 (premise k) (conclude (pair m k m)))
  (query secret m))
)";

}  // namespace

TEST_SUITE("dsl") {
  TEST_CASE("shipped protocol files match the builtins") {
    auto builtins = builtin_protocols();
    CHECK(parse_protocol(slurp("protocols/ns.kf")) == builtins.at("ns"));
    CHECK(parse_protocol(slurp("protocols/ns-lowe.kf")) == builtins.at("ns-lowe"));
  }

  TEST_CASE("printing and parsing round trip") {
    for (const auto& [name, spec] : builtin_protocols()) {
      CAPTURE(name);
      CHECK(parse_protocol(print_protocol(spec)) == spec);
    }
    auto tiny = parse_protocol(kTiny);
    CHECK(parse_protocol(print_protocol(tiny)) == tiny);
  }

  TEST_CASE("Needham-Schroeder compiles to 18 rule instances") {
    auto spec = builtin_protocols().at("ns");
    CHECK(spec.rules.size() == 3);
    auto c = compile(spec);
    CHECK(c.problem.protocol.size() == 18);
    CHECK(c.pattern_rules.size() == 18);
    CHECK(c.problem.enabled == std::vector<std::string>{"e", "t", "n"});
    CHECK(c.problem.initial.count(atom("sko")));
    CHECK_FALSE(c.problem.initial.count(atom("ska")));

    auto target = c.queries.at("responder-nonce-secrecy");
    REQUIRE(target.size() == 1);
    Term na = nonce(eps(), identity("a"));
    CHECK(target[0] == nonce(enc(pk(atom("skb")), pair(identity("a"), na)), identity("b")));

    // Role instances carry their assignment.
    const ProjectedRule* r = c.problem.find_rule("ns2", {{"p", "a"}, {"p2", "b"}});
    REQUIRE(r);
    REQUIRE(r->premises.size() == 1);
    CHECK(r->premises[0] == enc(pk(atom("skb")), pair(identity("a"), var("v"))));
  }

  TEST_CASE("Lowe's fix changes message 2 and its check") {
    auto ns = builtin_protocols().at("ns");
    auto lowe = builtin_protocols().at("ns-lowe");
    REQUIRE(ns.rules.size() == lowe.rules.size());
    int differing = 0;
    for (std::size_t i = 0; i < ns.rules.size(); ++i) {
      if (!(ns.rules[i] == lowe.rules[i])) ++differing;
    }
    CHECK(differing == 2);
    CHECK(ns.rules[0] == lowe.rules[0]);
  }

  TEST_CASE("sugar: n-ary pairs nest to the right, (sk p) names an atom") {
    auto c = compile(parse_protocol(kTiny));
    REQUIRE(c.problem.protocol.size() == 1);
    CHECK(c.problem.protocol[0].conclusion == pair(atom("m"), pair(atom("k"), atom("m"))));
    CHECK(c.problem.protocol[0].id == "r1");
    CHECK(c.queries.at("secret") == std::vector<Term>{atom("m")});

    auto ns = compile(builtin_protocols().at("ns"));
    CHECK(ns.problem.initial.count(pk(atom("ska"))));
  }

  TEST_CASE("unnamed rules are numbered and tellers must be honest") {
    auto c = compile(parse_protocol(R"(
(protocol p
  (principal a honest) (principal o adversary)
  (atom k) (use t)
  (rule r1 (teller a) (conclude k))
  (rule (teller a) (conclude (pair k k)))
  (query q k)))"));
    REQUIRE(c.problem.protocol.size() == 2);
    CHECK(c.problem.protocol[1].id == "rule2");

    auto bad = issues_of(R"((protocol p
  (principal a honest) (principal o adversary)
  (atom k) (use t)
  (rule r1 (teller o) (conclude k))))");
    CHECK(has_issue(bad, "teller 'o' is not honest"));
  }

  TEST_CASE("parse errors carry positions") {
    auto missing = issues_of("(knows o k)");
    REQUIRE(missing.size() == 1);
    CHECK(missing[0].message == "missing protocol form");
    CHECK(missing[0].line == 1);

    auto undeclared = issues_of(R"((protocol p
  (principal o adversary)
  (use t)
  (knows o x)))");
    REQUIRE_FALSE(undeclared.empty());
    CHECK(has_issue(undeclared, "undeclared identifier 'x'"));
    CHECK(undeclared[0].line == 4);

    auto unbound = issues_of(slurp("tests/fixtures/unbound.kf"));
    CHECK(has_issue(unbound, "unbound variable w"));
    for (const auto& i : unbound) CHECK(i.line > 0);

    auto lexical = issues_of("(protocol p (use t)");
    CHECK_FALSE(lexical.empty());
  }

  TEST_CASE("load_protocol resolves builtins and paths") {
    CHECK(load_protocol("ns") == builtin_protocols().at("ns"));
    CHECK(load_protocol(std::string(KFLOW_SOURCE_DIR) + "/protocols/ns-lowe.kf") ==
          builtin_protocols().at("ns-lowe"));
    CHECK_THROWS(load_protocol("/nonexistent/protocol.kf"));
  }

  TEST_CASE("protocol JSON lists principals and rules") {
    auto j = to_json(builtin_protocols().at("ns"));
    CHECK(j["name"] == "ns");
    CHECK(j["rules"].size() == 3);
  }
}
