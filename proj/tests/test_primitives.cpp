#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kflow/dsl.hpp"
#include "kflow/error.hpp"
#include "kflow/primitives.hpp"
#include "kflow/universe.hpp"

using namespace kflow;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(KFLOW_SOURCE_DIR) + "/" + rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two atoms, the spec's own constructors, depth 2.
std::vector<Term> hand_universe(const PrimitiveSpec& spec) {
  TermSet atoms{atom("k1"), atom("k2"), identity("o")};
  std::set<Tag> ctors;
  for (Term t : spec.schema) {
    for (Tag c : constructors(t)) ctors.insert(c);
  }
  return enumerate_universe(atoms, ctors, 2);
}

}  // namespace

TEST_SUITE("primitives") {
  TEST_CASE("builtin specs are well formed and pass both conditions") {
    CHECK(builtin_primitive_names() == std::vector<std::string>{"e", "se", "t", "set", "n", "h", "r"});
    for (const auto& spec : builtin_specs()) {
      CAPTURE(spec.principal);
      CHECK_NOTHROW(validate_spec(spec));
      auto report = check_local_cf(spec, hand_universe(spec));
      CHECK(report.pass);
      CHECK(report.tuples_checked > 0);
    }
  }

  TEST_CASE("the public-key spec classifies as in the paper's example") {
    auto e = *builtin_spec("e");
    CHECK(e.composing == std::set<std::size_t>{2, 4, 5});
    CHECK(e.decomposing == std::set<std::size_t>{3});
    auto cls = classify(e);
    REQUIRE(cls.size() == 4);
    auto three = std::find_if(cls.begin(), cls.end(), [](const auto& c) { return c.position == 3; });
    REQUIRE(three != cls.end());
    CHECK(three->kind == RuleKind::Decomposing);
    CHECK(three->controlled_by == std::optional<std::size_t>(4));
  }

  TEST_CASE("the spec file format reproduces the builtin e") {
    auto specs = parse_primitive_specs(slurp("primitives/e.prim"));
    REQUIRE(specs.size() == 1);
    auto e = *builtin_spec("e");
    CHECK(specs[0].schema == e.schema);
    CHECK(specs[0].composing == e.composing);
    CHECK(specs[0].decomposing == e.decomposing);
    CHECK(specs[0].premise_sets == e.premise_sets);
    auto again = parse_primitive_specs(print_primitive_spec(specs[0]));
    CHECK(again[0].premise_sets == specs[0].premise_sets);
    CHECK(again[0].schema == specs[0].schema);
  }

  TEST_CASE("fault-injected specs name the violated condition") {
    auto s1 = parse_primitive_specs(slurp("tests/fixtures/broken-s1.prim")).at(0);
    auto r1 = check_local_cf(s1, hand_universe(s1));
    CHECK_FALSE(r1.pass);
    REQUIRE(r1.violations.size() == 1);
    CHECK(r1.violations[0].condition == "s1");
    CHECK(r1.violations[0].positions == std::vector<std::size_t>{3});
    CHECK_THROWS_AS(classify(s1), ValidationError);

    auto s2 = parse_primitive_specs(slurp("tests/fixtures/broken-s2.prim")).at(0);
    auto r2 = check_local_cf(s2, hand_universe(s2));
    CHECK_FALSE(r2.pass);
    REQUIRE(r2.violations.size() == 1);
    CHECK(r2.violations[0].condition == "s2");
    auto pos = r2.violations[0].positions;
    std::sort(pos.begin(), pos.end());
    CHECK(pos == std::vector<std::size_t>{3, 4});
  }

  TEST_CASE("malformed specs are rejected before checking") {
    auto bad = parse_primitive_specs(slurp("tests/fixtures/malformed.prim")).at(0);
    CHECK_THROWS_AS(validate_spec(bad), ValidationError);
    auto both = *builtin_spec("h");
    both.decomposing.insert(2);
    CHECK_THROWS_AS(validate_spec(both), ValidationError);
    auto missing = *builtin_spec("t");
    missing.premise_sets.erase(1);
    CHECK_THROWS_AS(validate_spec(missing), ValidationError);
    CHECK_THROWS_AS(parse_primitive_specs("(primitive p (schema x) (w x (1)))"), ParseError);
  }

  TEST_CASE("strata of the public-key primitive") {
    auto e = *builtin_spec("e");
    std::vector<Term> u = enumerate_universe({atom("k1"), atom("k2")}, {Tag::PubKey, Tag::Enc, Tag::Sig}, 2);
    auto m = strata(u, {e});
    CHECK(m.unreached.empty());
    CHECK(m.stratum(atom("k1")) == 0);
    CHECK(m.stratum(pk(atom("k1"))) == 1);
    CHECK(m.stratum(sig(atom("k1"), atom("k2"))) == 1);
    CHECK(m.stratum(enc(pk(atom("k1")), atom("k2"))) == 2);
    // Not in Im(S): the key is not a public key.
    CHECK(m.stratum(enc(atom("k1"), atom("k2"))) == 0);
    CHECK(m.precedes(atom("k2"), enc(pk(atom("k1")), atom("k2"))));
  }

  TEST_CASE("classification agrees with strata on every rule instance") {
    std::size_t instances = 0;
    for (const auto& spec : builtin_specs()) {
      CAPTURE(spec.principal);
      auto u = hand_universe(spec);
      auto m = strata(u, {spec});
      for (const auto& rule : oscar_rules({spec.principal})) {
        for (const auto& inst : ground_instances(rule, u)) {
          bool below = std::all_of(inst.premises.begin(), inst.premises.end(),
                                   [&](Term p) { return m.precedes(p, inst.conclusion); });
          CHECK(below == (rule.kind == RuleKind::Composing));
          if (rule.kind == RuleKind::Decomposing) {
            CHECK(m.precedes(inst.conclusion, inst.premises.at(*rule.controlling)));
          }
          ++instances;
        }
      }
    }
    CHECK(instances > 1000);
  }

  TEST_CASE("builtin fixed sets are empty and images disjoint") {
    auto specs = builtin_specs();
    std::vector<Term> u = enumerate_universe(
        {atom("k1"), atom("k2"), identity("o")},
        {Tag::PubKey, Tag::Enc, Tag::Pair, Tag::Hash, Tag::Nonce, Tag::Set2, Tag::RuleVal}, 2);
    for (const auto& spec : specs) {
      CAPTURE(spec.principal);
      CHECK(fixed_set(u, spec).members.empty());
    }
    CHECK(strata(u, specs).unreached.empty());
    CHECK(image_collisions(specs, u).empty());
  }

  TEST_CASE("a value declared in the image without a witness stays fixed") {
    auto h = *builtin_spec("h");
    std::vector<Term> u{atom("k"), hash(atom("k"))};
    // hash(k) can only be composed from k, so it never enters a stratum either.
    auto fixed = fixed_set(u, h, {atom("k")});
    CHECK(fixed.members == TermSet{atom("k"), hash(atom("k"))});
  }
}
