#include <doctest.h>

#include <random>

#include "alphatown/synthesis.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace alphatown;

TEST_SUITE("synthesis") {
  TEST_CASE("last-change plan with an auxiliary block") {
    const auto plan = plan_for_pattern(Pattern::parse("1,1,0,0", 2), 10000);
    CHECK(plan.strategy == PlanStrategy::kLastChange);
    CHECK(plan.t == std::optional<std::size_t>(2));
    CHECK(plan.aux_ground == 1000);
    CHECK(plan.aux_count == 1);
    CHECK(plan.predicted_size() == 133);
    REQUIRE(plan.root.type == PlanNode::Type::kConcat);
    REQUIRE(plan.root.children.size() == 2);
    CHECK(plan.root.children[0].ground == 9000);
    CHECK(plan.root.children[0].block.s == 2);
    CHECK(plan.root.children[1].ground == 1000);
    CHECK(plan.root.children[1].block.s == 1);
    const auto family = execute_plan(plan);
    CHECK(family.size() == 133);
    CHECK(family.ground_size() == 10000);
  }

  TEST_CASE("periodic-span plan") {
    const auto plan = plan_for_pattern(Pattern::parse("1,1,0,1,0,1", 2), 600);
    CHECK(plan.strategy == PlanStrategy::kPeriodicSpan);
    CHECK(plan.level == std::optional<std::size_t>(1));
    REQUIRE(plan.root.children.size() == 2);
    CHECK(plan.root.children[0].block.kind == BlockKind::kBlock);
    CHECK(plan.root.children[0].block.s == 1);
    CHECK(plan.root.children[1].block.kind == BlockKind::kCoblock);
    CHECK(plan.root.children[1].block.s == 1);
    CHECK(plan.root.children[1].block.i == 1);
    CHECK(plan.root.children[0].ground == 300);
    const auto certificate = synthesize(Pattern::parse("1,1,0,1,0,1", 2), 600, 6);
    CHECK(certificate.verified);
    CHECK(certificate.size() == plan.predicted_size());
  }

  TEST_CASE("constant and unit-decomposition plans") {
    const auto zero = plan_for_pattern(Pattern::parse("0,0,0", 2), 10);
    CHECK(zero.strategy == PlanStrategy::kConstant);
    CHECK(zero.predicted_size() == 32);
    CHECK(execute_plan(zero).size() == 32);

    const auto ones = synthesize(Pattern::parse("1,1,1", 2), 11, 3);
    CHECK(ones.plan.strategy == PlanStrategy::kConstant);
    CHECK(ones.plan.shifts == 1);
    CHECK(ones.size() == 32);
    CHECK(ones.verified);

    // k = 5 < 2t, a_3 != a_5 rules out period 2, and period 4 would only
    // give 1/3: the unit decomposition eps_1 + eps_3 is used.
    const auto unit = plan_for_pattern(Pattern::parse("1,0,1,0,0", 2), 300);
    CHECK(unit.strategy == PlanStrategy::kUnitDecomposition);
    CHECK(unit.t == std::optional<std::size_t>(3));
    CHECK(unit.predicted_size() == 10);
    CHECK(synthesize(Pattern::parse("1,0,1,0,0", 2), 300, 5).verified);

    // A short pattern lies in the period-2 span: (1,0,1) = dot_eps_{1,2}.
    const auto short_span = synthesize(Pattern::parse("1,0,1", 2), 300, 3);
    CHECK(short_span.plan.strategy == PlanStrategy::kPeriodicSpan);
    CHECK(short_span.plan.level == std::optional<std::size_t>(1));
    CHECK(short_span.verified);
    CHECK(short_span.size() == 300);

    // The open bracket case: eps_1 + dot_eps_{1,4} at period 4.
    const auto bracket = synthesize(Pattern::parse("0,0,0,0,1", 2), 1000, 5);
    CHECK(bracket.plan.strategy == PlanStrategy::kPeriodicSpan);
    CHECK(bracket.plan.level == std::optional<std::size_t>(2));
    CHECK(bracket.verified);
  }

  TEST_CASE("single block certificates") {
    const auto eps2 = synthesize(epsilon(2, 4, 2), 1000, 4);
    CHECK(eps2.size() == 45);
    CHECK(eps2.verified);
    CHECK(eps2.target_formula == "(2! n)^(1/2)");
    REQUIRE(eps2.ratio());
    CHECK(*eps2.ratio() == doctest::Approx(45.0 / std::sqrt(2000.0)));

    const auto mixed = synthesize(Pattern::parse("1,1,0,0", 2), 10000, 4);
    CHECK(mixed.size() == 133);
    CHECK(*mixed.ratio() == doctest::Approx(133.0 / std::sqrt(20000.0)));

    const auto star = synthesize(Pattern::parse("*,0,0,0", 3), 200, 4);
    CHECK(star.plan.planned.to_string() == "1,0,0,0");
    CHECK(star.size() == 198);
    CHECK(star.verified);
  }

  TEST_CASE("ground too small") {
    for (std::uint64_t n = 4; n <= 8; ++n) {
      CHECK_THROWS_KIND(synthesize(Pattern::parse("0,1,0,0", 2), n, 4), ErrorKind::kGroundTooSmall);
    }
    CHECK_THROWS_KIND(plan_for_pattern(Pattern::parse("0,0", 3), 2), ErrorKind::kGroundTooSmall);
    CHECK_THROWS_KIND(plan_for_pattern(Pattern::parse("0,0", 3), 0), ErrorKind::kInvalidInput);
  }

  TEST_CASE("an exhausted verification budget leaves the certificate unverified") {
    SynthesisOptions options;
    options.verify_budget = 5;
    const auto certificate = synthesize(epsilon(2, 4, 2), 1000, 4, options);
    CHECK_FALSE(certificate.verified);
    CHECK(certificate.outcome.verdict == Verdict::kBudgetExhausted);
  }

  TEST_CASE("random patterns synthesize verified families") {
    std::mt19937_64 rng(99);
    // Constant patterns would otherwise materialize 2^20 members each.
    SynthesisOptions options;
    options.member_limit = 1 << 12;
    int built = 0;
    for (int trial = 0; trial < 150; ++trial) {
      const std::uint64_t p = trial % 3 == 0 ? 3 : 2;
      const std::size_t k = 1 + rng() % 6;
      std::vector<std::int64_t> entries(k);
      for (auto& e : entries) e = static_cast<std::int64_t>(rng() % p);
      const Pattern pattern(p, entries);
      const std::uint64_t n = 200 + rng() % 2000;
      try {
        const auto certificate = synthesize(pattern, n, k, options);
        ++built;
        CHECK(certificate.verified);
        CHECK(certificate.size() == certificate.plan.predicted_size());
        CHECK(certificate.family.ground_size() == n);
        if (certificate.size() <= 14) {
          CHECK_FALSE(oracle::first_violation(certificate.family.members(), entries, p, k));
        }
      } catch (const Error& e) {
        CHECK_MESSAGE(e.kind() == ErrorKind::kGroundTooSmall, e.what());
      }
    }
    CHECK(built > 100);
  }

  TEST_CASE("certificate JSON") {
    const auto certificate = synthesize(epsilon(2, 4, 2), 1000, 4);
    const auto json = to_json(certificate);
    CHECK(json["size"] == 45);
    CHECK(json["verified"] == true);
    CHECK(json["plan"]["strategy"] == "last-change");
    CHECK(json["family"]["members"].size() == 45);
    CHECK(family_from_json(json["family"]) == certificate.family);
  }
}
