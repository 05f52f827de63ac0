#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kflow/engine.hpp"
#include "kflow/knowledge.hpp"
#include "kflow/universe.hpp"

namespace kflow {

// Small random protocols over an exhaustively enumerated universe, used to
// compare the two-phase engine with naive saturation.
struct RandomProtocolOptions {
  int max_atoms = 3;
  int max_families = 4;
  int max_depth = 3;
  std::size_t universe_cap = 6'000;
};

struct RandomProtocol {
  std::uint64_t seed = 0;
  Problem problem;
  Universe universe;
  int depth = 0;
  std::string describe() const;
};

RandomProtocol random_protocol(std::uint64_t seed, const RandomProtocolOptions& options = {});

// Engine and oracle disagreement on one random protocol.
struct OracleComparison {
  std::vector<Term> engine_only;
  std::vector<Term> oracle_only;
  std::size_t compared = 0;
  std::size_t attacks = 0;  // universe terms both find derivable
  std::size_t pruning_checks = 0;
  std::size_t pruning_violations = 0;
  bool engine_fixpoint = false;
  bool ok() const { return engine_only.empty() && oracle_only.empty(); }
};

// Every universe term is a target: compares the engine's derivable set with
// naive g-saturation. Engine rounds are unbounded (it runs to fixpoint).
OracleComparison compare_with_oracle(const Problem& problem, const Universe& universe,
                                     int synthesis_depth, AnalyzerOptions options = {});

// A full knowledge state over named principals, for checking f against g and
// the adversary merge.
struct RandomInstance {
  std::uint64_t seed = 0;
  std::vector<Principal> principals;
  KnowledgeState k0;
  std::vector<PatternRule> rules;
  Universe universe;
};

// One honest principal h, Oscar o and the enabled primitives; honest and
// primitive principals know every universe value.
RandomInstance random_omniscient_instance(std::uint64_t seed);

// Three adversaries o1..o3 with scattered knowledge, rules among them and
// from an honest h.
RandomInstance random_multi_adversary_instance(std::uint64_t seed);

}  // namespace kflow
