#include "kflow/sexpr.hpp"

#include <cctype>

#include "kflow/error.hpp"

namespace kflow {

namespace {

std::string summarize(const std::vector<ParseIssue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += std::to_string(issue.line) + ":" + std::to_string(issue.column) + ": " +
           issue.message;
  }
  return out;
}

bool symbol_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ';';
}

}  // namespace

ParseError::ParseError(std::vector<ParseIssue> issues)
    : Error(summarize(issues)), issues_(std::move(issues)) {}

std::vector<SExpr> read_sexprs(std::string_view text) {
  std::vector<ParseIssue> issues;
  std::vector<SExpr> top;
  std::vector<SExpr> stack;
  int line = 1;
  int col = 1;
  std::size_t i = 0;

  auto emit = [&](SExpr e) {
    if (stack.empty()) {
      top.push_back(std::move(e));
    } else {
      stack.back().items.push_back(std::move(e));
    }
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '(') {
      SExpr e;
      e.is_list = true;
      e.line = line;
      e.column = col;
      stack.push_back(std::move(e));
      ++col;
      ++i;
      continue;
    }
    if (c == ')') {
      if (stack.empty()) {
        issues.push_back({line, col, "unexpected ')'"});
      } else {
        SExpr done = std::move(stack.back());
        stack.pop_back();
        emit(std::move(done));
      }
      ++col;
      ++i;
      continue;
    }
    SExpr s;
    s.line = line;
    s.column = col;
    std::size_t start = i;
    while (i < text.size() && symbol_char(text[i])) {
      ++i;
      ++col;
    }
    s.atom = std::string(text.substr(start, i - start));
    emit(std::move(s));
  }
  for (const auto& open : stack) {
    issues.push_back({open.line, open.column, "unclosed '('"});
  }
  if (!issues.empty()) throw ParseError(std::move(issues));
  return top;
}

std::string print_sexpr(const SExpr& e) {
  if (!e.is_list) return e.atom;
  std::string out = "(";
  for (std::size_t i = 0; i < e.items.size(); ++i) {
    if (i) out += ' ';
    out += print_sexpr(e.items[i]);
  }
  out += ')';
  return out;
}

std::string pretty_sexpr(const SExpr& e, int indent) {
  if (!e.is_list || e.items.size() < 2) return print_sexpr(e);
  // Only lists whose children are themselves lists get broken across lines.
  bool nested = false;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    if (e.items[i].is_list && e.items[i].items.size() > 2) nested = true;
  }
  if (!nested || indent > 0) return print_sexpr(e);
  std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  std::string out = "(" + print_sexpr(e.items[0]);
  std::size_t i = 1;
  while (i < e.items.size() && !e.items[i].is_list) {
    out += ' ' + e.items[i].atom;
    ++i;
  }
  for (; i < e.items.size(); ++i) {
    out += '\n' + pad + pretty_sexpr(e.items[i], indent + 2);
  }
  out += ')';
  return out;
}

}  // namespace kflow
