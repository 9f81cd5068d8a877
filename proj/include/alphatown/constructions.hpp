#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "alphatown/family.hpp"
#include "alphatown/pattern.hpp"

namespace alphatown {

enum class BlockKind { kBlock, kCoblock };

/// Parameters of a (co-)building block: stars or co-stars of the s-subsets
/// of [m], m the largest integer with C(m, s) <= n and m = i (mod p^(v+1)),
/// v the p-adic valuation of s!.
struct BlockParams {
  BlockKind kind = BlockKind::kBlock;
  std::uint64_t s = 1;
  std::uint64_t i = 0;
  std::uint64_t p = 2;
  std::uint64_t n = 0;
};

/// p^(v_p(s!) + 1), the residue-class modulus for m.
[[nodiscard]] std::uint64_t block_class_modulus(std::uint64_t s, std::uint64_t p);

/// The member count m for these parameters (maximal in its residue class),
/// or ground-too-small when no m >= s + 1 fits.
[[nodiscard]] std::uint64_t block_member_count(const BlockParams& params);

/// Members E_j = {e : j in e} over the s-subsets e of [m], each subset
/// labeled by 1 + its colexicographic rank. Ground size is n.
[[nodiscard]] SetFamily building_block(const BlockParams& params);

/// Members E'_j = {e : j not in e}; same labeling as building_block.
[[nodiscard]] SetFamily co_building_block(const BlockParams& params);

/// Dispatches on params.kind.
[[nodiscard]] SetFamily make_block(const BlockParams& params);

/// The pattern a block is guaranteed to realize: eps_s for a block with
/// i = s - 1; dot_eps_{(i mod q) + 1, q} for a co-block of subset size q - 1,
/// q a power of p. Throws invalid-input for parameters outside those cases.
[[nodiscard]] Pattern block_guaranteed_pattern(const BlockParams& params, std::size_t k);

inline constexpr std::uint64_t kDefaultMemberLimit = std::uint64_t{1} << 20;

/// Number of members zero_block emits: 2^b for the largest usable b.
[[nodiscard]] std::uint64_t zero_block_size(std::uint64_t p, std::uint64_t n,
                                            std::uint64_t member_limit = kDefaultMemberLimit);

/// All unions of disjoint blocks {1..p}, {p+1..2p}, ...; when 2^(n/p) exceeds
/// the member limit only the first b blocks (2^b <= limit) are used.
[[nodiscard]] SetFamily zero_block(std::uint64_t p, std::uint64_t n,
                                   std::uint64_t member_limit = kDefaultMemberLimit);

/// Adds the fresh element n + 1 to every member.
[[nodiscard]] SetFamily shift_lift(const SetFamily& family);

/// Pairwise unions of the i-th members on disjoint grounds (second family
/// offset by the first ground size); size is min(|F1|, |F2|).
[[nodiscard]] SetFamily concatenate(const SetFamily& first, const SetFamily& second);

struct TraceResult {
  SetFamily family;
  /// multiplicities[j] counts remaining members whose trace is family.member(j + 1).
  std::vector<std::size_t> multiplicities;
  /// Elements of T in the original ground, in relabeled order.
  std::vector<std::uint32_t> trace_ground;
};

/// Traces of the non-fixed members on the intersection T of the fixed ones
/// (1-based indices), deduplicated and relabeled onto [|T|].
[[nodiscard]] TraceResult trace_restrict(const SetFamily& family, const std::vector<std::size_t>& fixed);

[[nodiscard]] nlohmann::json to_json(const BlockParams& params);
[[nodiscard]] const char* to_string(BlockKind kind);

/// Upper bound on emitted member elements; larger requests are refused
/// with budget-exhausted instead of exhausting memory.
inline constexpr std::uint64_t kMaxFamilyElements = 200'000'000ULL;

}  // namespace alphatown
