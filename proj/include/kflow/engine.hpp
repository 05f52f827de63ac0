#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kflow/knowledge.hpp"
#include "kflow/rules.hpp"
#include "kflow/term.hpp"
#include "kflow/universe.hpp"

namespace kflow {

struct Bounds {
  int max_term_depth = 6;
  int max_rounds = 4;
  int max_synthesis_depth = 8;
  std::size_t universe_cap = 200'000;
};

// Oscar's view of a protocol after merging and honest saturation: the initial
// value set X0, one projected rule per role instance of each protocol rule
// family (the rule value |x→y| fired through the rule primitive), and the
// classified primitive library.
struct Problem {
  TermSet initial;
  std::vector<ProjectedRule> protocol;
  std::vector<ProjectedRule> primitives;
  std::vector<std::string> enabled;

  std::vector<ProjectedRule> composing() const;
  std::vector<ProjectedRule> decomposing() const;
  // Protocol rules followed by primitive rules, i.e. everything g applies.
  std::vector<ProjectedRule> all_rules() const;
  const ProjectedRule* find_rule(const std::string& id,
                                 const std::map<std::string, std::string>& roles) const;
};

Problem make_problem(TermSet initial, std::vector<ProjectedRule> protocol,
                     const std::vector<std::string>& enabled);

enum class StepKind { Initial, Compose, Decompose, ProtocolRule };
std::string_view step_kind_name(StepKind k);

struct ProofNode;
using DerivationProof = std::shared_ptr<const ProofNode>;

struct ProofNode {
  StepKind kind = StepKind::Initial;
  std::string rule;  // empty for plain initial knowledge
  std::map<std::string, std::string> roles;
  Substitution subst;
  std::vector<DerivationProof> premises;  // in rule-premise order
  Term conclusion;
};

enum class Status { AttackFound, SecureAtBound };
std::string_view status_name(Status s);

struct Statistics {
  std::size_t universe_size = 0;
  std::size_t analyzed_size = 0;
  std::size_t synthesizable_size = 0;
  std::size_t decompositions = 0;
  std::size_t protocol_firings = 0;
  int rounds = 0;
  bool fixpoint = false;  // no new value in the last round
  std::size_t pruning_checks = 0;
  std::size_t pruning_violations = 0;
};

struct Verdict {
  Status status = Status::SecureAtBound;
  Term target;  // the target found derivable, or the first one checked
  DerivationProof proof;
  Bounds bounds;
  Statistics stats;
};

// ---- Naive oracle -------------------------------------------------------

// One application of every communication rule instance inside `universe`.
KnowledgeState f_step(const KnowledgeState& k, const std::vector<PatternRule>& rules,
                      const Universe& universe);
// f_step to fixpoint; `steps` receives the number of productive iterations.
KnowledgeState f_star(const KnowledgeState& k0, const std::vector<PatternRule>& rules,
                      const Universe& universe, int* steps = nullptr);

// X ∪ { x : X_σ → x with X_σ ⊆ X }, conclusions restricted to `universe`.
TermSet g_step(const TermSet& x, const std::vector<ProjectedRule>& rules, const Universe& universe);

// Least fixpoint of g_step. Throws ResourceError when |X| passes `cap`.
TermSet saturate_naive(const TermSet& x0, const std::vector<ProjectedRule>& rules,
                       const Universe& universe, std::size_t cap = 1'000'000);
// Same, over every term of depth <= bounds.max_term_depth built from the
// leaves of X0 and the rules with the rules' constructors.
TermSet saturate_naive(const TermSet& x0, const std::vector<ProjectedRule>& rules,
                       const Bounds& bounds);

// ---- Two-phase engine ---------------------------------------------------

// Subterm closure of X0, the targets, and every protocol rule instance whose
// variables range over the universe built so far, all within the depth bound.
Universe relevant_universe(const Problem& problem, const std::vector<Term>& targets,
                           const Bounds& bounds);

struct AnalyzerOptions {
  // Check Theorem-2 style pruning: decomposing any self-composed value must
  // yield nothing new.
  bool instrument = false;
  // Test-only fault: treat decomposing rules as composing ones.
  bool misclassify = false;
};

class Analyzer {
 public:
  Analyzer(const Problem& problem, const Universe& universe, Bounds bounds,
           AnalyzerOptions options = {});

  // Decompose, fire protocol rules, repeat for at most max_rounds rounds.
  void run();

  const std::vector<Term>& analyzed() const { return analyzed_order_; }
  bool is_analyzed(Term t) const { return proofs_.count(t) > 0; }
  // Buildable from the analyzed set with composing rules, inside the universe.
  bool derivable(Term t) const { return pool_.count(t) > 0; }
  std::vector<Term> derivable_terms() const;
  DerivationProof prove(Term t);
  const Statistics& stats() const { return stats_; }
  // Decompositions of self-composed values that produced an unknown value.
  const std::vector<std::string>& pruning_log() const { return pruning_log_; }

 private:
  bool add(Term t, DerivationProof proof);
  void decompose_closure();
  void compute_pool();
  bool fire_protocol();
  void check_pruning();
  DerivationProof synth(Term t, int depth);

  const Problem& problem_;
  const Universe& universe_;
  Bounds bounds_;
  AnalyzerOptions options_;
  std::vector<ProjectedRule> composing_;
  std::vector<ProjectedRule> decomposing_;

  std::unordered_map<Term, DerivationProof> proofs_;
  std::vector<Term> analyzed_order_;
  TermHashSet pool_;
  std::unordered_map<Term, int> height_;
  std::map<std::pair<Term, int>, DerivationProof> memo_;
  std::size_t memo_generation_ = 0;
  Statistics stats_;
  std::vector<std::string> pruning_log_;
};

// Closure of X0 under the decomposing rules, side premises discharged by
// synthesis. No protocol rules.
TermSet analyze(const TermSet& x0, const std::vector<ProjectedRule>& decomposing,
                const std::vector<ProjectedRule>& composing, const Universe& universe,
                const Bounds& bounds);

// Top-down composing-only proof search from `analyzed` (whose members are
// proof leaves). Returns null when no proof of height <= depth exists.
DerivationProof synthesize(Term target, const TermSet& analyzed,
                           const std::vector<ProjectedRule>& composing, int depth);

// Throws ValidationError when a target is not ground or uses leaves the
// problem never mentions.
Verdict derivable(Term target, const Problem& problem, const Bounds& bounds,
                  AnalyzerOptions options = {});
// Attack if any target is derivable; the first one (in the given order) is reported.
Verdict check_targets(const std::vector<Term>& targets, const Problem& problem,
                      const Bounds& bounds, AnalyzerOptions options = {});

// Independent re-check of every proof step against the rule definitions.
// Throws ValidationError on structurally malformed proofs.
bool replay(const DerivationProof& proof, const Problem& problem);

nlohmann::json to_json(const DerivationProof& proof);
DerivationProof proof_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const Bounds& b);
nlohmann::json to_json(const Statistics& s);

// Numbered "Oscar learns <term> via <rule> from <premises>" lines.
std::vector<std::string> trace_lines(const DerivationProof& proof);

}  // namespace kflow
