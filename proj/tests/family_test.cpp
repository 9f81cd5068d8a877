#include <doctest.h>

#include <array>
#include <random>
#include <set>

#include "alphatown/constructions.hpp"
#include "alphatown/family.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace alphatown;

namespace {

std::set<std::uint64_t> residues_at(const IntersectionProfile& profile, std::size_t level) {
  std::set<std::uint64_t> out;
  for (const auto& entry : profile.levels.at(level - 1).witnesses) out.insert(entry.first);
  return out;
}

}  // namespace

TEST_SUITE("family") {
  TEST_CASE("construction validates members") {
    const SetFamily family(3, 2, {{3}, {1}, {2}});
    CHECK(family.member(1) == Member{1});
    CHECK(family.member(3) == Member{3});
    CHECK_THROWS_KIND(SetFamily(3, 2, {{1, 2}, {2, 1}}), ErrorKind::kInvalidInput);
    CHECK_THROWS_KIND(SetFamily(3, 2, {{4}}), ErrorKind::kInvalidInput);
    CHECK_THROWS_KIND(SetFamily(3, 2, {{0}}), ErrorKind::kInvalidInput);
    CHECK_THROWS_KIND(SetFamily(3, 4, {{1}}), ErrorKind::kInvalidInput);
    const SetFamily with_empty(2, 2, {{}, {1, 2}});
    CHECK(with_empty.member(1).empty());
  }

  TEST_CASE("intersection profiles") {
    const auto block = building_block({BlockKind::kBlock, 2, 1, 2, 10});
    const auto profile = intersection_profile(block, 4);
    REQUIRE(profile.levels.size() == 4);
    CHECK(residues_at(profile, 1) == std::set<std::uint64_t>{0});
    CHECK(residues_at(profile, 2) == std::set<std::uint64_t>{1});
    CHECK(residues_at(profile, 3) == std::set<std::uint64_t>{0});
    CHECK(residues_at(profile, 4) == std::set<std::uint64_t>{0});
    CHECK(profile_compatible(profile, epsilon(2, 4, 2)));

    const SetFamily singletons(3, 2, {{1}, {2}, {3}});
    const auto small = intersection_profile(singletons, 2);
    CHECK(residues_at(small, 1) == std::set<std::uint64_t>{1});
    CHECK(residues_at(small, 2) == std::set<std::uint64_t>{0});
    CHECK_FALSE(small.vacuous_from);

    const SetFamily lonely(4, 3, {{1, 2, 4}});
    const auto one = intersection_profile(lonely, 3);
    CHECK(one.levels.size() == 1);
    CHECK(residues_at(one, 1) == std::set<std::uint64_t>{0});
    CHECK(one.vacuous_from == std::optional<std::size_t>(2));
  }

  TEST_CASE("verification examples") {
    const auto pattern = Pattern::parse("0,1,0", 2);
    CHECK(verify_pattern(SetFamily(3, 2, {{1, 2}, {1, 3}, {2, 3}}), pattern).passed());
    const auto bad = verify_pattern(SetFamily(4, 2, {{1, 2}, {1, 3}, {1, 4}}), pattern);
    CHECK(bad.verdict == Verdict::kFail);
    REQUIRE(bad.violation);
    CHECK(bad.violation->level == 3);
    CHECK(bad.violation->members == std::vector<std::size_t>{1, 2, 3});
    CHECK(bad.violation->size == 1);
    CHECK(bad.violation->expected == 0);
    CHECK(verify_pattern(SetFamily(3, 2, {{1}, {2}, {3}}), Pattern::parse("1,0", 2)).passed());
    CHECK_THROWS_KIND(verify_pattern(SetFamily(3, 2, {{1}}), Pattern::parse("1,0", 3)), ErrorKind::kInvalidInput);
  }

  TEST_CASE("depth is clamped and vacuous levels are reported") {
    const SetFamily pair(3, 2, {{1}, {2}});
    const auto outcome = verify_pattern(pair, Pattern::parse("1,0,1,1", 2), 10);
    CHECK(outcome.passed());
    CHECK(outcome.requested_depth == 4);
    CHECK(outcome.checked_depth == 2);
    CHECK(outcome.vacuous_from == std::optional<std::size_t>(3));
    const auto shallow = verify_pattern(SetFamily(4, 2, {{1, 2}, {1, 3}, {1, 4}}), Pattern::parse("0,1,0", 2), 2);
    CHECK(shallow.passed());
  }

  TEST_CASE("budget exhaustion") {
    const auto block = building_block({BlockKind::kBlock, 2, 1, 2, 1000});
    const auto outcome = verify_pattern(block, epsilon(2, 4, 2), std::nullopt, 10);
    CHECK(outcome.verdict == Verdict::kBudgetExhausted);
    CHECK_FALSE(outcome.passed());
  }

  TEST_CASE("verification agrees with naive enumeration on random families") {
    std::mt19937_64 rng(20240611);
    int failures_seen = 0;
    for (int trial = 0; trial < 600; ++trial) {
      const std::uint64_t p = trial % 3 == 0 ? 3 : 2;
      const std::uint64_t n = 3 + rng() % 6;
      const std::size_t count = 1 + rng() % 7;
      const double density = trial % 4 == 0 ? 0.15 : 0.5;
      const auto members = oracle::random_family(rng, n, count, density);
      const SetFamily family(n, p, members);
      const std::size_t k = 1 + rng() % 5;
      std::vector<std::int64_t> entries(k);
      for (auto& e : entries) {
        e = static_cast<std::int64_t>(rng() % p);
        if (p == 3 && rng() % 4 == 0) e = Pattern::kStar;
      }
      const Pattern pattern(p, entries);
      const auto outcome = verify_pattern(family, pattern);
      const auto naive = oracle::first_violation(family.members(), entries, p, k);
      REQUIRE(outcome.verdict != Verdict::kBudgetExhausted);
      CHECK(outcome.passed() == !naive.has_value());
      if (naive && outcome.violation) {
        ++failures_seen;
        CHECK(outcome.violation->level == naive->level);
        CHECK(outcome.violation->members == naive->members);
        CHECK(outcome.violation->size == naive->size);
      }
      // Profile and verification must tell the same story.
      CHECK(profile_compatible(intersection_profile(family, k), pattern) == outcome.passed());
    }
    CHECK(failures_seen > 100);
  }

  TEST_CASE("nearly universal families agree with naive enumeration") {
    // Members are U minus pairwise disjoint chunks, with a shared core,
    // optional private elements and some unused ground: the shape the
    // closed-form check handles.
    std::mt19937_64 rng(77);
    int failures_seen = 0;
    for (int trial = 0; trial < 400; ++trial) {
      const std::uint64_t p = std::array<std::uint64_t, 3>{2, 3, 5}[trial % 3];
      const std::size_t count = 2 + rng() % 7;
      const std::uint32_t core = static_cast<std::uint32_t>(rng() % 4);
      std::vector<std::uint32_t> chunk(count);
      bool empty_used = false;
      for (auto& c : chunk) {
        c = static_cast<std::uint32_t>(rng() % 4);
        if (c == 0 && empty_used) c = 1;
        empty_used = empty_used || c == 0;
      }
      std::uint32_t next = core + 1;
      std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;  // [first, last) of each chunk
      for (auto c : chunk) {
        ranges.emplace_back(next, next + c);
        next += c;
      }
      std::vector<Member> members;
      std::uint32_t private_next = next;
      for (std::size_t j = 0; j < count; ++j) {
        Member member;
        for (std::uint32_t e = 1; e < next; ++e) {
          if (e <= core || e < ranges[j].first || e >= ranges[j].second) member.push_back(e);
        }
        // Elements only this member has.
        if (trial % 2 == 1) {
          for (auto extra = rng() % 3; extra > 0; --extra) member.push_back(private_next++);
        }
        members.push_back(member);
      }
      const SetFamily family(private_next + 2, p, members);
      const std::size_t k = 1 + rng() % 6;
      std::vector<std::int64_t> entries(k);
      for (auto& e : entries) {
        e = static_cast<std::int64_t>(rng() % p);
        if (p > 2 && rng() % 4 == 0) e = Pattern::kStar;
      }
      const auto outcome = verify_pattern(family, Pattern(p, entries));
      const auto naive = oracle::first_violation(family.members(), entries, p, k);
      CHECK(outcome.passed() == !naive.has_value());
      if (naive && outcome.violation) {
        ++failures_seen;
        CHECK(outcome.violation->level == naive->level);
        CHECK(outcome.violation->members == naive->members);
        CHECK(outcome.violation->size == naive->size);
      }
    }
    CHECK(failures_seen > 100);
  }

  TEST_CASE("co-singleton families verify at full depth over a large ground") {
    std::vector<Member> members;
    for (std::uint32_t j = 1; j <= 500; ++j) {
      Member member;
      for (std::uint32_t e = 1; e <= 500; ++e) {
        if (e != j) member.push_back(e);
      }
      members.push_back(member);
    }
    const SetFamily family(500, 2, members);
    // l-wise intersections have 500 - l elements: odd exactly at odd l.
    CHECK(verify_pattern(family, dot_epsilon(1, 2, 8, 2)).passed());
    const auto outcome = verify_pattern(family, dot_epsilon(2, 2, 8, 2));
    REQUIRE(outcome.violation);
    CHECK(outcome.violation->level == 1);
    CHECK(outcome.violation->members == std::vector<std::size_t>{1});
    CHECK(outcome.violation->size == 499);
  }

  TEST_CASE("large sparse families use the same verdicts") {
    // Singletons over a big ground exercise the sparse representation.
    std::vector<Member> members;
    for (std::uint32_t e = 1; e <= 60; ++e) members.push_back({e, 1000 + e});
    const SetFamily family(2000, 2, members);
    CHECK(verify_pattern(family, Pattern::parse("0,0,0", 2)).passed());
    members.push_back({1, 2});
    const auto outcome = verify_pattern(SetFamily(2000, 2, members), Pattern::parse("0,0,0", 2));
    CHECK(outcome.verdict == Verdict::kFail);
    REQUIRE(outcome.violation);
    CHECK(outcome.violation->level == 2);
  }

  TEST_CASE("codec") {
    const auto family = parse_family(R"({"modulus":2,"ground_size":3,"members":[[1],[2],[3]]})");
    CHECK(family == SetFamily(3, 2, {{1}, {2}, {3}}));
    const auto text = serialize_family(family, {{"source", "test"}});
    CHECK(text.back() == '\n');
    CHECK(text == R"({"ground_size":3,"members":[[1],[2],[3]],"modulus":2,"provenance":{"source":"test"}})" "\n");
    CHECK(parse_family(text) == family);

    const auto expect_error = [](const std::string& document, const std::string& fragment) {
      try {
        (void)parse_family(document);
        FAIL("accepted " << document);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kInvalidInput);
        CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
      }
    };
    expect_error(R"({"modulus":2,"ground_size":3,"members":[[1,2],[2,1]]})", "members[1] duplicates members[0]");
    expect_error(R"({"modulus":2,"ground_size":3,"members":[[1],[4]]})", "members[1][0]");
    expect_error(R"({"modulus":2,"ground_size":3,"members":[[1,1]]})", "members[0]");
    expect_error(R"({"modulus":4,"ground_size":3,"members":[]})", "prime");
    expect_error(R"({"modulus":2,"members":[]})", "ground_size");
    expect_error(R"({"modulus":2,"ground_size":3,"members":[],"extra":1})", "extra");
    expect_error(R"({"modulus":2,)", "malformed JSON");
  }

  TEST_CASE("codec round trip on random families") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      const std::uint64_t n = 1 + rng() % 12;
      const SetFamily family(n, 5, oracle::random_family(rng, n, rng() % 10, 0.4));
      CHECK(parse_family(serialize_family(family)) == family);
    }
  }

  TEST_CASE("ground resizing and truncation") {
    const SetFamily family(3, 2, {{1}, {2}, {3}});
    CHECK(family.with_ground_size(10).ground_size() == 10);
    CHECK_THROWS_KIND(family.with_ground_size(2), ErrorKind::kInvalidInput);
    CHECK(family.truncated(2) == SetFamily(3, 2, {{1}, {2}}));
  }
}
