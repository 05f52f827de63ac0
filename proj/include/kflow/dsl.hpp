#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kflow/engine.hpp"
#include "kflow/primitives.hpp"
#include "kflow/principal.hpp"
#include "kflow/sexpr.hpp"

namespace kflow {

// (forall (p in (a b)) ...): one entry per role variable.
struct RoleQuantifier {
  std::string var;
  std::vector<std::string> domain;
  friend bool operator==(const RoleQuantifier&, const RoleQuantifier&) = default;
};

// Term bodies are kept as written so printing reproduces the source sugar
// (n-ary pair, (sk p)). Positions inside SExpr do not take part in equality.
struct RuleDecl {
  std::string name;  // may be empty
  std::vector<RoleQuantifier> roles;
  std::optional<std::string> teller;
  std::vector<SExpr> premises;
  SExpr conclusion;
  friend bool operator==(const RuleDecl&, const RuleDecl&) = default;
};

struct FactDecl {
  std::string principal;
  SExpr term;
  friend bool operator==(const FactDecl&, const FactDecl&) = default;
};

struct QueryDecl {
  std::string name;
  std::vector<RoleQuantifier> roles;
  SExpr target;
  friend bool operator==(const QueryDecl&, const QueryDecl&) = default;
};

struct ProtocolSpec {
  std::string name;
  std::vector<Principal> principals;  // declaration order
  std::vector<std::string> atoms;
  std::vector<std::string> primitives;
  std::vector<FactDecl> facts;
  std::vector<RuleDecl> rules;
  std::vector<QueryDecl> queries;
  friend bool operator==(const ProtocolSpec&, const ProtocolSpec&) = default;
};

// Throws ParseError carrying every problem found, each with a position.
ProtocolSpec parse_protocol(std::string_view text);
// Same checks for a spec built in code; positions are 0 there.
void validate(const ProtocolSpec& spec);

SExpr to_sexpr(const ProtocolSpec& spec);
std::string print_protocol(const ProtocolSpec& spec);

// "ns": Needham-Schroeder public key as rule values ns1-ns3.
// "ns-lowe": Lowe's fix, responder identity carried in message 2.
std::map<std::string, ProtocolSpec> builtin_protocols();

// Resolves a protocol argument: a builtin name, otherwise a file path.
ProtocolSpec load_protocol(const std::string& name_or_path);

// Role expansion, adversary merge and projection. Every rule value becomes
// one ProjectedRule per role assignment; adversary knowledge becomes X0.
struct CompiledProtocol {
  Problem problem;
  std::map<std::string, std::vector<Term>> queries;
  std::vector<PatternRule> pattern_rules;  // teller -> o rule values, before projection
};
CompiledProtocol compile(const ProtocolSpec& spec);

nlohmann::json to_json(const ProtocolSpec& spec);

// Primitive spec files:
//   (primitive e (schema s (pk s) x (enc (pk s) x) (sig s x))
//     (compose 2 4 5) (decompose 3)
//     (w 2 (1)) (w 3 (1 4)) (w 4 (2 3)) (w 5 (1 3))
//     (guard k pk))
// Bare symbols in a schema are variables. A file may hold several forms.
std::vector<PrimitiveSpec> parse_primitive_specs(std::string_view text);
std::string print_primitive_spec(const PrimitiveSpec& spec);

}  // namespace kflow
