#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alphatown/pattern.hpp"

namespace alphatown {

/// A sorted list of 1-based ground elements.
using Member = std::vector<std::uint32_t>;

/// Distinct subsets of [n] together with the modulus they are judged under.
///
/// Members are kept in canonical order (lexicographic on element
/// sequences), so member indices are stable for equal families. The empty
/// set is a legal member.
class SetFamily {
 public:
  SetFamily(std::uint64_t ground_size, std::uint64_t modulus, std::vector<Member> members);

  [[nodiscard]] std::uint64_t ground_size() const noexcept { return ground_size_; }
  [[nodiscard]] std::uint64_t modulus() const noexcept { return modulus_; }
  [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
  [[nodiscard]] bool empty() const noexcept { return members_.empty(); }
  [[nodiscard]] const std::vector<Member>& members() const noexcept { return members_; }
  /// 1-based member access.
  [[nodiscard]] const Member& member(std::size_t index) const;

  /// Same members over a larger ground set.
  [[nodiscard]] SetFamily with_ground_size(std::uint64_t ground_size) const;
  /// The first `count` members in canonical order.
  [[nodiscard]] SetFamily truncated(std::size_t count) const;

  friend bool operator==(const SetFamily&, const SetFamily&) = default;

 private:
  std::uint64_t ground_size_;
  std::uint64_t modulus_;
  std::vector<Member> members_;
};

/// Default cap on enumerated member subsets during profiling/verification.
inline constexpr std::uint64_t kDefaultNodeBudget = 4'000'000'000ULL;

struct LevelProfile {
  std::size_t level = 0;
  /// residue -> first (lexicographic) 1-based member-index subset realizing it.
  std::map<std::uint64_t, std::vector<std::size_t>> witnesses;
};

struct IntersectionProfile {
  std::size_t depth = 0;
  std::vector<LevelProfile> levels;  // levels 1..min(depth, |F|)
  /// First level with no l-subset of distinct members, if <= depth.
  std::optional<std::size_t> vacuous_from;
  bool complete = true;
  std::uint64_t nodes = 0;
};

/// Realized residues of all l-wise intersections of distinct members for
/// l <= depth. Stops early and clears `complete` when the budget runs out.
[[nodiscard]] IntersectionProfile intersection_profile(const SetFamily& family, std::size_t depth,
                                                       std::uint64_t node_budget = kDefaultNodeBudget);

/// True when every realized residue is allowed by the pattern entry at its level.
[[nodiscard]] bool profile_compatible(const IntersectionProfile& profile, const Pattern& pattern);

struct Violation {
  std::size_t level = 0;
  std::vector<std::size_t> members;  // 1-based indices
  std::uint64_t size = 0;
  std::int64_t expected = 0;         // Pattern::kStar for a star entry
};

enum class Verdict { kPass, kFail, kBudgetExhausted };

struct VerificationOutcome {
  Verdict verdict = Verdict::kPass;
  std::size_t requested_depth = 0;
  /// Deepest level with at least one l-subset, i.e. min(depth, |F|).
  std::size_t checked_depth = 0;
  std::optional<std::size_t> vacuous_from;
  std::optional<Violation> violation;
  std::uint64_t nodes = 0;

  [[nodiscard]] bool passed() const noexcept { return verdict == Verdict::kPass; }
};

/// Checks every l-wise intersection (l <= depth, default and maximum the
/// pattern length) against the pattern and stops at the first violation in
/// lexicographic member-index order.
[[nodiscard]] VerificationOutcome verify_pattern(const SetFamily& family, const Pattern& pattern,
                                                 std::optional<std::size_t> depth = std::nullopt,
                                                 std::uint64_t node_budget = kDefaultNodeBudget);

[[nodiscard]] nlohmann::json family_to_json(const SetFamily& family);
/// Parses a family document; throws invalid-input naming the offending location.
[[nodiscard]] SetFamily family_from_json(const nlohmann::json& document);

/// Compact, sorted-key JSON followed by a single newline.
[[nodiscard]] std::string dump_document(const nlohmann::json& document);
[[nodiscard]] SetFamily parse_family(const std::string& text);
[[nodiscard]] std::string serialize_family(const SetFamily& family,
                                           const nlohmann::json& provenance = nullptr);

[[nodiscard]] nlohmann::json to_json(const IntersectionProfile& profile);
[[nodiscard]] nlohmann::json to_json(const VerificationOutcome& outcome);

}  // namespace alphatown
