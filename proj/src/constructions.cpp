#include "alphatown/constructions.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "alphatown/arith.hpp"
#include "alphatown/error.hpp"

namespace alphatown {

namespace {

void check_element_budget(std::uint64_t members, std::uint64_t member_size) {
  if (member_size != 0 && members > kMaxFamilyElements / member_size) {
    throw Error(ErrorKind::kBudgetExhausted,
                "family would hold " + std::to_string(members) + " members of size " +
                    std::to_string(member_size) + ", above the materialization limit");
  }
}

// Calls visit(rank, subset) for every s-subset of [m] in colexicographic order.
template <typename Visit>
void for_each_colex_subset(std::uint32_t m, std::uint32_t s, Visit&& visit) {
  std::vector<std::uint32_t> subset(s);
  for (std::uint32_t j = 0; j < s; ++j) subset[j] = j + 1;
  std::uint64_t rank = 0;
  if (s == 0) {
    visit(rank, subset);
    return;
  }
  if (s > m) return;
  while (true) {
    visit(rank++, subset);
    std::uint32_t j = 0;
    while (j < s && subset[j] + 1 == (j + 1 < s ? subset[j + 1] : m + 1)) ++j;
    if (j == s) return;
    ++subset[j];
    for (std::uint32_t r = 0; r < j; ++r) subset[r] = r + 1;
  }
}

SetFamily build_block_family(const BlockParams& params, bool complement) {
  const auto m = block_member_count(params);
  const auto s = params.s;
  const auto member_size = complement ? binomial_capped(m - 1, s, kMaxFamilyElements)
                                      : binomial_capped(m - 1, s - 1, kMaxFamilyElements);
  check_element_budget(m, member_size);

  std::vector<Member> members(m);
  for (auto& member : members) member.reserve(member_size);
  std::vector<bool> inside(m + 1, false);
  for_each_colex_subset(static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(s),
                        [&](std::uint64_t rank, const std::vector<std::uint32_t>& subset) {
                          const auto label = static_cast<std::uint32_t>(rank + 1);
                          if (!complement) {
                            for (auto j : subset) members[j - 1].push_back(label);
                            return;
                          }
                          for (auto j : subset) inside[j] = true;
                          for (std::uint64_t j = 1; j <= m; ++j) {
                            if (!inside[j]) members[j - 1].push_back(label);
                          }
                          for (auto j : subset) inside[j] = false;
                        });
  return SetFamily(params.n, params.p, std::move(members));
}

}  // namespace

const char* to_string(BlockKind kind) { return kind == BlockKind::kBlock ? "block" : "coblock"; }

std::uint64_t block_class_modulus(std::uint64_t s, std::uint64_t p) {
  return checked_pow(p, factorial_valuation(s, p).value + 1);
}

std::uint64_t block_member_count(const BlockParams& params) {
  require_prime(params.p);
  if (params.s < 1) throw_invalid("block subset size must be positive");
  const auto q = block_class_modulus(params.s, params.p);
  if (params.i >= q) {
    throw_invalid("residue class " + std::to_string(params.i) + " outside [0, " + std::to_string(q - 1) + "]");
  }
  // Largest m with C(m, s) <= n; C(m, s) is increasing in m for m >= s.
  std::uint64_t lo = params.s;  // C(s, s) = 1
  if (params.n < 1) lo = params.s - 1;
  std::uint64_t hi = params.n + params.s + 1;
  while (hi - lo > 1) {
    const auto mid = lo + (hi - lo) / 2;
    if (binomial_capped(mid, params.s, params.n) <= params.n) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::uint64_t largest = lo;
  const std::uint64_t m = largest >= params.i ? largest - (largest - params.i) % q : 0;
  if (largest < params.i || m < params.s + 1) {
    throw Error(ErrorKind::kGroundTooSmall,
                std::string(to_string(params.kind)) + " s=" + std::to_string(params.s) + " i=" +
                    std::to_string(params.i) + " p=" + std::to_string(params.p) + " n=" +
                    std::to_string(params.n) + ": no m >= " + std::to_string(params.s + 1) +
                    " with m = " + std::to_string(params.i) + " mod " + std::to_string(q) +
                    " and C(m, s) <= n");
  }
  return m;
}

SetFamily building_block(const BlockParams& params) {
  if (params.kind != BlockKind::kBlock) throw_invalid("building_block needs kind=block");
  return build_block_family(params, false);
}

SetFamily co_building_block(const BlockParams& params) {
  if (params.kind != BlockKind::kCoblock) throw_invalid("co_building_block needs kind=coblock");
  return build_block_family(params, true);
}

SetFamily make_block(const BlockParams& params) {
  return params.kind == BlockKind::kBlock ? building_block(params) : co_building_block(params);
}

Pattern block_guaranteed_pattern(const BlockParams& params, std::size_t k) {
  const auto q = block_class_modulus(params.s, params.p);
  if (params.kind == BlockKind::kBlock) {
    if (params.i != (params.s - 1) % q) {
      throw_invalid("block guarantees eps_s only in residue class s - 1");
    }
    if (params.s > k) return all_equal(0, k, params.p);
    return epsilon(params.s, k, params.p);
  }
  std::uint64_t period = 1;
  while (period < params.s + 1) period *= params.p;
  if (period != params.s + 1 || period == 1) {
    throw_invalid("co-block guarantees a periodic pattern only for subset size p^t - 1");
  }
  const auto start = params.i % period + 1;
  return dot_epsilon(start, period, k, params.p);
}

std::uint64_t zero_block_size(std::uint64_t p, std::uint64_t n, std::uint64_t member_limit) {
  require_prime(p);
  if (n < p) {
    throw Error(ErrorKind::kGroundTooSmall,
                "zero block needs n >= p (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
  }
  if (member_limit < 1) throw_invalid("member limit must be positive");
  std::uint64_t blocks = 0;
  while (blocks < n / p && blocks < 63 && (std::uint64_t{1} << (blocks + 1)) <= member_limit) ++blocks;
  return std::uint64_t{1} << blocks;
}

SetFamily zero_block(std::uint64_t p, std::uint64_t n, std::uint64_t member_limit) {
  const auto size = zero_block_size(p, n, member_limit);
  const auto blocks = static_cast<std::uint32_t>(std::countr_zero(size));
  check_element_budget(size, blocks * p);
  std::vector<Member> members;
  members.reserve(size);
  for (std::uint64_t mask = 0; mask < size; ++mask) {
    Member member;
    for (std::uint32_t b = 0; b < blocks; ++b) {
      if ((mask >> b) & 1U) {
        for (std::uint64_t e = 1; e <= p; ++e) member.push_back(static_cast<std::uint32_t>(b * p + e));
      }
    }
    members.push_back(std::move(member));
  }
  return SetFamily(n, p, std::move(members));
}

SetFamily shift_lift(const SetFamily& family) {
  const auto fresh = family.ground_size() + 1;
  std::vector<Member> members = family.members();
  for (auto& member : members) member.push_back(static_cast<std::uint32_t>(fresh));
  return SetFamily(fresh, family.modulus(), std::move(members));
}

SetFamily concatenate(const SetFamily& first, const SetFamily& second) {
  if (first.modulus() != second.modulus()) {
    throw_invalid("concatenate: moduli differ (" + std::to_string(first.modulus()) + " vs " +
                  std::to_string(second.modulus()) + ")");
  }
  const auto offset = static_cast<std::uint32_t>(first.ground_size());
  const auto count = std::min(first.size(), second.size());
  std::vector<Member> members;
  members.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    Member member = first.members()[j];
    for (auto e : second.members()[j]) member.push_back(e + offset);
    members.push_back(std::move(member));
  }
  return SetFamily(first.ground_size() + second.ground_size(), first.modulus(), std::move(members));
}

TraceResult trace_restrict(const SetFamily& family, const std::vector<std::size_t>& fixed) {
  if (fixed.empty() || fixed.size() >= family.size()) {
    throw_invalid("trace needs 1 <= t < |F| fixed members (t=" + std::to_string(fixed.size()) +
                  ", |F|=" + std::to_string(family.size()) + ")");
  }
  std::vector<bool> is_fixed(family.size() + 1, false);
  for (auto index : fixed) {
    if (index < 1 || index > family.size() || is_fixed[index]) {
      throw_invalid("trace: invalid or repeated member index " + std::to_string(index));
    }
    is_fixed[index] = true;
  }
  Member core = family.member(fixed.front());
  for (std::size_t j = 1; j < fixed.size(); ++j) {
    const auto& other = family.member(fixed[j]);
    Member next;
    std::set_intersection(core.begin(), core.end(), other.begin(), other.end(), std::back_inserter(next));
    core = std::move(next);
  }

  std::map<Member, std::size_t> traces;
  for (std::size_t index = 1; index <= family.size(); ++index) {
    if (is_fixed[index]) continue;
    const auto& member = family.member(index);
    Member trace;
    for (auto e : member) {
      const auto it = std::lower_bound(core.begin(), core.end(), e);
      if (it != core.end() && *it == e) trace.push_back(static_cast<std::uint32_t>(it - core.begin() + 1));
    }
    ++traces[trace];
  }
  std::vector<Member> members;
  std::vector<std::size_t> multiplicities;
  for (auto& [trace, count] : traces) {
    members.push_back(trace);
    multiplicities.push_back(count);
  }
  return {SetFamily(core.size(), family.modulus(), std::move(members)), std::move(multiplicities), core};
}

nlohmann::json to_json(const BlockParams& params) {
  return {{"kind", to_string(params.kind)}, {"s", params.s}, {"i", params.i}, {"modulus", params.p}, {"n", params.n}};
}

}  // namespace alphatown
