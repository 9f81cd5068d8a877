#pragma once

#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "alphatown/family.hpp"
#include "alphatown/pattern.hpp"

namespace alphatown {

enum class SearchStatus { kExhausted, kBudgetExhausted };

struct SearchOptions {
  std::uint64_t node_budget = 100'000'000ULL;
  unsigned jobs = 1;
};

struct SearchResult {
  std::uint64_t value = 0;
  SetFamily witness;
  SearchStatus status = SearchStatus::kExhausted;
  std::uint64_t nodes_explored = 0;
  /// Largest size allowed by the counting bound C(f, t) <= n, when it applied.
  std::optional<std::uint64_t> counting_cap;

  /// Witness size <= pattern length: some constraints were vacuous.
  [[nodiscard]] bool within_pattern_length(std::size_t k) const noexcept { return value <= k; }
};

/// Largest family over [n] satisfying the pattern, by depth-first
/// branch-and-bound over subsets in increasing mask order.
///
/// A candidate joins only if every l-wise intersection it takes part in
/// (l up to min(k, new size)) matches; since the property is hereditary the
/// remaining candidates are filtered against each new member, and a branch
/// is cut when its size plus the surviving candidates cannot beat the best.
/// For p = 2, a_t = 1 with zero tail and k >= 2t, the counting bound
/// C(f, t) <= n caps the search as well. The witness is the
/// lexicographically least optimal family in mask order.
[[nodiscard]] SearchResult exact_max_family(const Pattern& pattern, std::uint64_t n,
                                            const SearchOptions& options = {});

/// Maximum n accepted by exact_max_family.
inline constexpr std::uint64_t kMaxSearchGround = 24;

[[nodiscard]] nlohmann::json to_json(const SearchResult& result, const Pattern& pattern, std::uint64_t n);

}  // namespace alphatown
