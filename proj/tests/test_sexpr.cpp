#include <doctest.h>

#include "kflow/error.hpp"
#include "kflow/sexpr.hpp"

using namespace kflow;

TEST_SUITE("sexpr") {
  TEST_CASE("reads nested lists and records positions") {
    auto forms = read_sexprs("; comment\n(a (b c)\n   d)");
    REQUIRE(forms.size() == 1);
    const SExpr& f = forms[0];
    CHECK(f.is_form("a"));
    CHECK(f.line == 2);
    CHECK(f.column == 1);
    REQUIRE(f.items.size() == 3);
    CHECK(f.items[1].is_form("b"));
    CHECK(f.items[2].is_symbol("d"));
    CHECK(f.items[2].line == 3);
    CHECK(f.items[2].column == 4);
  }

  TEST_CASE("equality ignores positions") {
    auto a = read_sexprs("(x (y z))");
    auto b = read_sexprs("\n\n   (x\n (y   z))");
    CHECK(a == b);
    CHECK(read_sexprs("(x y)") != read_sexprs("(x z)"));
  }

  TEST_CASE("print then read is the identity") {
    auto forms = read_sexprs("(protocol p (rule r (premise (var v)) (conclude (hash (var v)))))");
    CHECK(read_sexprs(print_sexpr(forms[0])) == forms);
    CHECK(read_sexprs(pretty_sexpr(forms[0])) == forms);
  }

  TEST_CASE("lexical errors carry positions") {
    try {
      read_sexprs("(a b))\n(c");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      REQUIRE(e.issues().size() == 2);
      CHECK(e.issues()[0].line == 1);
      CHECK(e.issues()[0].column == 6);
      CHECK(e.issues()[0].message == "unexpected ')'");
      CHECK(e.issues()[1].line == 2);
      CHECK(e.issues()[1].message == "unclosed '('");
    }
  }

  TEST_CASE("empty input reads as no forms") { CHECK(read_sexprs("  ; nothing\n").empty()); }
}
