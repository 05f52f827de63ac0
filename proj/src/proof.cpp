#include <functional>
#include <unordered_map>

#include "kflow/engine.hpp"
#include "kflow/error.hpp"

namespace kflow {

namespace {

bool expected_kind(StepKind step, RuleKind rule) {
  switch (step) {
    case StepKind::Compose: return rule == RuleKind::Composing;
    case StepKind::Decompose: return rule == RuleKind::Decomposing;
    case StepKind::ProtocolRule: return rule == RuleKind::Protocol;
    case StepKind::Initial: return rule == RuleKind::Protocol;
  }
  return false;
}

std::string rule_label(const ProofNode& n) {
  std::string out = n.rule;
  if (!n.roles.empty()) {
    out += '[';
    bool first = true;
    for (const auto& [k, v] : n.roles) {
      if (!first) out += ", ";
      first = false;
      out += k + "=" + v;
    }
    out += ']';
  }
  return out;
}

}  // namespace

bool replay(const DerivationProof& proof, const Problem& problem) {
  std::unordered_map<const ProofNode*, bool> seen;
  std::function<bool(const DerivationProof&)> check = [&](const DerivationProof& p) -> bool {
    if (!p) throw ValidationError("malformed proof: missing step");
    if (!p->conclusion) throw ValidationError("malformed proof: step without conclusion");
    if (auto it = seen.find(p.get()); it != seen.end()) return it->second;
    bool ok = [&] {
      if (p->kind == StepKind::Initial && p->rule.empty()) {
        return p->premises.empty() && problem.initial.count(p->conclusion) > 0;
      }
      const ProjectedRule* r = problem.find_rule(p->rule, p->roles);
      if (!r || !expected_kind(p->kind, r->kind)) return false;
      if (p->kind == StepKind::Initial && !r->premises.empty()) return false;
      if (!guards_hold(r->guards, p->subst)) return false;
      if (try_instantiate(r->conclusion, p->subst) != std::optional<Term>(p->conclusion)) {
        return false;
      }
      if (p->premises.size() != r->premises.size()) return false;
      for (std::size_t i = 0; i < r->premises.size(); ++i) {
        auto want = try_instantiate(r->premises[i], p->subst);
        if (!p->premises[i]) throw ValidationError("malformed proof: missing premise");
        if (!want || *want != p->premises[i]->conclusion) return false;
      }
      for (const auto& sub : p->premises) {
        if (!check(sub)) return false;
      }
      return true;
    }();
    seen[p.get()] = ok;
    return ok;
  };
  return check(proof);
}

nlohmann::json to_json(const DerivationProof& proof) {
  if (!proof) return nullptr;
  nlohmann::json j;
  j["kind"] = std::string(step_kind_name(proof->kind));
  j["conclusion"] = to_sexpr(proof->conclusion);
  if (!proof->rule.empty()) j["rule"] = proof->rule;
  if (!proof->roles.empty()) j["roles"] = proof->roles;
  if (!proof->subst.empty()) {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [k, v] : proof->subst) s[k] = to_sexpr(v);
    j["subst"] = s;
  }
  if (!proof->premises.empty()) {
    nlohmann::json ps = nlohmann::json::array();
    for (const auto& p : proof->premises) ps.push_back(to_json(p));
    j["premises"] = ps;
  }
  return j;
}

DerivationProof proof_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("proof step must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ValidationError("proof step lacks a \"kind\" string");
  }
  if (!j.contains("conclusion") || !j["conclusion"].is_string()) {
    throw ValidationError("proof step lacks a \"conclusion\" string");
  }
  auto node = std::make_shared<ProofNode>();
  const std::string kind = j["kind"];
  if (kind == "initial") node->kind = StepKind::Initial;
  else if (kind == "compose") node->kind = StepKind::Compose;
  else if (kind == "decompose") node->kind = StepKind::Decompose;
  else if (kind == "protocol") node->kind = StepKind::ProtocolRule;
  else throw ValidationError("unknown proof step kind \"" + kind + "\"");
  try {
    node->conclusion = term_from_sexpr(j["conclusion"].get<std::string>());
    if (j.contains("rule")) node->rule = j["rule"].get<std::string>();
    if (j.contains("roles")) node->roles = j["roles"].get<std::map<std::string, std::string>>();
    if (j.contains("subst")) {
      for (const auto& [k, v] : j["subst"].items()) {
        node->subst[k] = term_from_sexpr(v.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed proof step: ") + e.what());
  }
  if (j.contains("premises")) {
    if (!j["premises"].is_array()) throw ValidationError("\"premises\" must be an array");
    for (const auto& p : j["premises"]) node->premises.push_back(proof_from_json(p));
  }
  return node;
}

nlohmann::json to_json(const Bounds& b) {
  return {{"max_term_depth", b.max_term_depth},
          {"max_rounds", b.max_rounds},
          {"max_synthesis_depth", b.max_synthesis_depth},
          {"universe_cap", b.universe_cap}};
}

nlohmann::json to_json(const Statistics& s) {
  return {{"universe_size", s.universe_size},
          {"analyzed_size", s.analyzed_size},
          {"synthesizable_size", s.synthesizable_size},
          {"decompositions", s.decompositions},
          {"protocol_firings", s.protocol_firings},
          {"rounds", s.rounds},
          {"fixpoint", s.fixpoint},
          {"pruning_checks", s.pruning_checks},
          {"pruning_violations", s.pruning_violations}};
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j;
  j["status"] = std::string(status_name(v.status));
  j["target"] = v.target ? nlohmann::json(to_sexpr(v.target)) : nlohmann::json(nullptr);
  j["bounds"] = to_json(v.bounds);
  j["statistics"] = to_json(v.stats);
  j["proof"] = to_json(v.proof);
  return j;
}

std::vector<std::string> trace_lines(const DerivationProof& proof) {
  std::vector<std::string> lines;
  std::unordered_map<Term, std::size_t> step_of;
  std::function<std::size_t(const DerivationProof&)> emit = [&](const DerivationProof& p) {
    if (auto it = step_of.find(p->conclusion); it != step_of.end()) return it->second;
    std::vector<std::size_t> refs;
    for (const auto& sub : p->premises) refs.push_back(emit(sub));
    std::string line = std::to_string(lines.size() + 1) + ". Oscar ";
    if (p->kind == StepKind::Initial && p->rule.empty()) {
      line += "knows " + to_sexpr(p->conclusion) + " initially";
    } else if (p->kind == StepKind::Initial) {
      line += "learns " + to_sexpr(p->conclusion) + " via " + rule_label(*p) + " unprompted";
    } else {
      line += "learns " + to_sexpr(p->conclusion) + " via " + rule_label(*p) + " from ";
      for (std::size_t i = 0; i < refs.size(); ++i) {
        if (i) line += ", ";
        line += "(" + std::to_string(refs[i]) + ")";
      }
    }
    lines.push_back(std::move(line));
    step_of[p->conclusion] = lines.size();
    return lines.size();
  };
  if (proof) emit(proof);
  return lines;
}

}  // namespace kflow
