#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kflow {

// Minimal s-expression reader shared by the term syntax and the protocol DSL.
// Comments run from ';' to end of line.
struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 0;
  int column = 0;

  static SExpr symbol(std::string s) {
    SExpr e;
    e.atom = std::move(s);
    return e;
  }
  static SExpr list(std::vector<SExpr> xs) {
    SExpr e;
    e.is_list = true;
    e.items = std::move(xs);
    return e;
  }

  bool is_symbol() const { return !is_list; }
  bool is_symbol(std::string_view s) const { return !is_list && atom == s; }
  // True for a list whose first element is the symbol `head`.
  bool is_form(std::string_view head) const {
    return is_list && !items.empty() && items[0].is_symbol(head);
  }

  // Positions are ignored.
  friend bool operator==(const SExpr& a, const SExpr& b) {
    return a.is_list == b.is_list && a.atom == b.atom && a.items == b.items;
  }
};

// Throws ParseError listing every lexical problem found.
std::vector<SExpr> read_sexprs(std::string_view text);

std::string print_sexpr(const SExpr& e);
// Line-broken rendering: top-level forms of a list go on their own lines.
std::string pretty_sexpr(const SExpr& e, int indent = 0);

}  // namespace kflow
