#include <doctest.h>

#include "kflow/random.hpp"

using namespace kflow;

TEST_SUITE("random") {
  TEST_CASE("random protocols are determined by their seed") {
    for (std::uint64_t seed : {1u, 7u, 42u}) {
      auto a = random_protocol(seed);
      auto b = random_protocol(seed);
      CHECK(a.describe() == b.describe());
      CHECK(a.universe.terms() == b.universe.terms());
    }
    CHECK(random_protocol(1).describe() != random_protocol(2).describe());
  }

  TEST_CASE("random universes respect the cap and hold X0") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto rp = random_protocol(seed);
      CHECK(rp.universe.size() <= RandomProtocolOptions{}.universe_cap);
      for (Term t : rp.problem.initial) CHECK(rp.universe.contains(t));
    }
  }

  TEST_CASE("engine and oracle agree on a small suite") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      auto rp = random_protocol(seed);
      auto c = compare_with_oracle(rp.problem, rp.universe, rp.depth + 1);
      CAPTURE(rp.describe());
      CHECK(c.ok());
      CHECK(c.engine_fixpoint);
      CHECK(c.compared == rp.universe.size());
    }
  }

  TEST_CASE("the misclassification fault is caught") {
    int mismatched = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      auto rp = random_protocol(seed);
      if (!compare_with_oracle(rp.problem, rp.universe, rp.depth + 1, {false, true}).ok()) {
        ++mismatched;
      }
    }
    CHECK(mismatched > 0);
  }

  TEST_CASE("omniscient and multi-adversary instances are deterministic") {
    auto a = random_omniscient_instance(5);
    auto b = random_omniscient_instance(5);
    CHECK(a.k0 == b.k0);
    CHECK(a.rules.size() == b.rules.size());
    auto m = random_multi_adversary_instance(5);
    auto n = random_multi_adversary_instance(5);
    CHECK(m.k0 == n.k0);
    for (const auto& r : m.rules) CHECK(r.learner.kind == PrincipalKind::Adversary);
  }
}
