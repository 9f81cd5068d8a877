#include "alphatown/family.hpp"

#include <algorithm>
#include <bit>
#include <iterator>
#include <optional>
#include <span>

#include "alphatown/arith.hpp"
#include "alphatown/error.hpp"

namespace alphatown {

SetFamily::SetFamily(std::uint64_t ground_size, std::uint64_t modulus, std::vector<Member> members)
    : ground_size_(ground_size), modulus_(modulus), members_(std::move(members)) {
  require_prime(modulus_);
  for (std::size_t j = 0; j < members_.size(); ++j) {
    auto& member = members_[j];
    std::sort(member.begin(), member.end());
    for (std::size_t e = 0; e < member.size(); ++e) {
      if (member[e] < 1 || member[e] > ground_size_) {
        throw_invalid("element " + std::to_string(member[e]) + " outside [1, " +
                      std::to_string(ground_size_) + "]");
      }
      if (e > 0 && member[e] == member[e - 1]) {
        throw_invalid("member repeats element " + std::to_string(member[e]));
      }
    }
  }
  std::sort(members_.begin(), members_.end());
  const auto dup = std::adjacent_find(members_.begin(), members_.end());
  if (dup != members_.end()) throw_invalid("duplicate member in family");
}

const Member& SetFamily::member(std::size_t index) const {
  if (index < 1 || index > members_.size()) {
    throw_invalid("member index " + std::to_string(index) + " out of range");
  }
  return members_[index - 1];
}

SetFamily SetFamily::with_ground_size(std::uint64_t ground_size) const {
  return SetFamily(ground_size, modulus_, members_);
}

SetFamily SetFamily::truncated(std::size_t count) const {
  count = std::min(count, members_.size());
  return SetFamily(ground_size_, modulus_,
                   std::vector<Member>(members_.begin(), members_.begin() + static_cast<std::ptrdiff_t>(count)));
}

namespace {

enum class WalkStatus { kComplete, kStopped, kBudgetExhausted };

// Depth-first enumeration of l-subsets of members (lexicographic on member
// indices) with running intersections. Elements are relabeled to the union
// of all members; members large relative to that union also get a bitset.
// An empty running intersection stays empty below, so only the leftmost
// chain of such a subtree is reported and the rest is skipped; every
// skipped node would report the same (level, size 0) as a chain node.
class IntersectionWalker {
 public:
  explicit IntersectionWalker(const SetFamily& family) : count_(family.size()) {
    std::vector<std::uint32_t> universe;
    for (const auto& member : family.members()) universe.insert(universe.end(), member.begin(), member.end());
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    words_ = std::max<std::size_t>(1, (universe.size() + 63) / 64);

    lists_.resize(count_);
    bitset_offset_.assign(count_, kNoBitset);
    for (std::size_t j = 0; j < count_; ++j) {
      const auto& member = family.members()[j];
      auto& list = lists_[j];
      list.reserve(member.size());
      for (auto element : member) {
        list.push_back(static_cast<std::uint32_t>(
            std::lower_bound(universe.begin(), universe.end(), element) - universe.begin()));
      }
      if (list.size() * 4 >= words_) {
        bitset_offset_[j] = bits_.size();
        bits_.resize(bits_.size() + words_, 0);
        for (auto x : list) bits_[bitset_offset_[j] + x / 64] |= std::uint64_t{1} << (x % 64);
      }
    }
  }

  // visit(level, indices, size) returns false to stop the walk.
  template <typename Visit>
  WalkStatus walk(std::size_t depth, std::uint64_t budget, std::uint64_t& nodes, Visit&& visit) {
    depth_ = std::min(depth, count_);
    budget_ = budget;
    nodes_ = 0;
    indices_.assign(depth_ + 1, 0);
    dense_.assign(depth_ + 1, std::vector<std::uint64_t>(words_, 0));
    sparse_.assign(depth_ + 1, {});
    WalkStatus status = WalkStatus::kComplete;
    for (std::size_t j = 0; j < count_ && status == WalkStatus::kComplete; ++j) {
      indices_[0] = j;
      View view = member_view(j);
      status = visit_node(1, view, visit);
    }
    nodes = nodes_;
    return status;
  }

 private:
  static constexpr std::size_t kNoBitset = static_cast<std::size_t>(-1);

  struct View {
    bool sparse = true;
    const std::uint32_t* elements = nullptr;
    const std::uint64_t* words = nullptr;
    std::size_t size = 0;
  };

  View member_view(std::size_t j) const {
    if (bitset_offset_[j] != kNoBitset) {
      return {false, nullptr, bits_.data() + bitset_offset_[j], lists_[j].size()};
    }
    return {true, lists_[j].data(), nullptr, lists_[j].size()};
  }

  bool in_member(std::size_t j, std::uint32_t x) const {
    if (bitset_offset_[j] != kNoBitset) return (bits_[bitset_offset_[j] + x / 64] >> (x % 64)) & 1U;
    return std::binary_search(lists_[j].begin(), lists_[j].end(), x);
  }

  // Intersection of `parent` with member j, stored in the buffers of `level`.
  View intersect(const View& parent, std::size_t j, std::size_t level) {
    auto& out_sparse = sparse_[level];
    out_sparse.clear();
    if (parent.sparse) {
      for (std::size_t e = 0; e < parent.size; ++e) {
        if (in_member(j, parent.elements[e])) out_sparse.push_back(parent.elements[e]);
      }
      return {true, out_sparse.data(), nullptr, out_sparse.size()};
    }
    if (bitset_offset_[j] == kNoBitset) {
      for (auto x : lists_[j]) {
        if ((parent.words[x / 64] >> (x % 64)) & 1U) out_sparse.push_back(x);
      }
      return {true, out_sparse.data(), nullptr, out_sparse.size()};
    }
    auto& out = dense_[level];
    const std::uint64_t* mine = bits_.data() + bitset_offset_[j];
    std::size_t count = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      out[w] = parent.words[w] & mine[w];
      count += static_cast<std::size_t>(std::popcount(out[w]));
    }
    if (count * 4 < words_) {
      for (std::size_t w = 0; w < words_; ++w) {
        for (std::uint64_t word = out[w]; word != 0; word &= word - 1) {
          out_sparse.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(word))));
        }
      }
      return {true, out_sparse.data(), nullptr, count};
    }
    return {false, nullptr, out.data(), count};
  }

  template <typename Visit>
  WalkStatus report(std::size_t level, std::uint64_t size, Visit& visit) {
    if (++nodes_ > budget_) return WalkStatus::kBudgetExhausted;
    if (!visit(level, std::span<const std::size_t>(indices_.data(), level), size)) {
      return WalkStatus::kStopped;
    }
    return WalkStatus::kComplete;
  }

  template <typename Visit>
  WalkStatus visit_node(std::size_t level, const View& view, Visit& visit) {
    if (auto status = report(level, view.size, visit); status != WalkStatus::kComplete) return status;
    const std::size_t last = indices_[level - 1];
    if (level == depth_ || last + 1 == count_) return WalkStatus::kComplete;

    if (view.size == 0) {
      for (std::size_t l = level + 1; l <= depth_ && last + (l - level) < count_; ++l) {
        indices_[l - 1] = last + (l - level);
        if (auto status = report(l, 0, visit); status != WalkStatus::kComplete) return status;
      }
      return WalkStatus::kComplete;
    }
    for (std::size_t j = last + 1; j < count_; ++j) {
      indices_[level] = j;
      const View child = intersect(view, j, level);
      if (auto status = visit_node(level + 1, child, visit); status != WalkStatus::kComplete) return status;
    }
    return WalkStatus::kComplete;
  }

  std::size_t count_;
  std::size_t words_ = 1;
  std::vector<std::vector<std::uint32_t>> lists_;
  std::vector<std::size_t> bitset_offset_;
  std::vector<std::uint64_t> bits_;

  std::size_t depth_ = 0;
  std::uint64_t budget_ = 0;
  std::uint64_t nodes_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<std::vector<std::uint64_t>> dense_;
  std::vector<std::vector<std::uint32_t>> sparse_;
};

std::vector<std::size_t> one_based(std::span<const std::size_t> indices) {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (auto j : indices) out.push_back(j + 1);
  return out;
}

std::optional<std::size_t> vacuous_level(std::size_t family_size, std::size_t depth) {
  if (family_size < depth) return family_size + 1;
  return std::nullopt;
}

// Closed-form verification for a common shape. Elements with identical
// membership form classes; a class whose size is 0 mod p never changes a
// residue and is dropped. If every remaining class lies in all members, in
// all but one, or in exactly one, then for l >= 2 an l-wise intersection S
// has base - sum_{j in S} missing_j elements mod p (single-member classes
// drop out), and level 1 is read off the member sizes. Zero blocks, shifts,
// stars, co-stars of singletons and their concatenations all have it.
struct NearlyUniversal {
  std::uint64_t base = 0;              // sum of class weights, mod p
  std::vector<std::uint64_t> missing;  // weight of classes absent only from member j, mod p
  std::vector<std::uint64_t> size;     // |M_j|
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::optional<NearlyUniversal> nearly_universal(const SetFamily& family) {
  const auto count = family.size();
  const auto p = family.modulus();
  if (count < 2 || p > 64) return std::nullopt;
  std::uint32_t top = 0;
  for (const auto& member : family.members()) {
    if (!member.empty()) top = std::max(top, member.back());
  }
  if (top > (1U << 24)) return std::nullopt;

  // Dense ids for the union, membership counts and a two-word signature of
  // each element's member set.
  std::vector<std::uint32_t> dense(std::size_t{top} + 1, 0);
  std::vector<std::uint32_t> hits;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> signature;
  for (std::size_t j = 0; j < count; ++j) {
    const auto h1 = splitmix(2 * j + 1);
    const auto h2 = splitmix(2 * j + 2);
    for (auto e : family.members()[j]) {
      if (dense[e] == 0) {
        hits.push_back(0);
        signature.emplace_back(0, 0);
        dense[e] = static_cast<std::uint32_t>(hits.size());
      }
      const auto id = dense[e] - 1;
      ++hits[id];
      signature[id].first += h1;
      signature[id].second += h2;
    }
  }
  const auto universe = hits.size();
  std::vector<std::uint32_t> order(universe);
  for (std::uint32_t id = 0; id < universe; ++id) order[id] = id;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return signature[a] < signature[b]; });
  std::vector<std::uint32_t> group(universe);
  std::vector<std::uint64_t> group_size;
  std::vector<std::uint32_t> group_hits;
  for (std::size_t r = 0; r < universe; ++r) {
    if (r == 0 || signature[order[r]] != signature[order[r - 1]]) {
      group_size.push_back(0);
      group_hits.push_back(hits[order[r]]);
    }
    group[order[r]] = static_cast<std::uint32_t>(group_size.size() - 1);
    ++group_size.back();
  }

  // Equal signatures must mean equal member sets: each member holds all of
  // a class or none of it. A collision fails this and falls back.
  const auto groups = group_size.size();
  std::vector<std::uint64_t> seen(groups, 0);
  std::vector<std::uint32_t> touched;
  std::vector<std::uint64_t> held_near(count, 0);  // weight of all-but-one classes member j holds
  const auto is_private = [&](std::uint32_t h) { return h == 1 && count > 2; };
  for (std::size_t j = 0; j < count; ++j) {
    touched.clear();
    for (auto e : family.members()[j]) {
      const auto g = group[dense[e] - 1];
      if (seen[g]++ == 0) touched.push_back(g);
    }
    for (auto g : touched) {
      const bool whole = seen[g] == group_size[g];
      seen[g] = 0;
      if (!whole) return std::nullopt;
      if (group_hits[g] + 1 == count && !is_private(group_hits[g])) held_near[j] += group_size[g] % p;
    }
  }

  NearlyUniversal out;
  std::uint64_t near_total = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const auto weight = group_size[g] % p;
    if (weight == 0 || is_private(group_hits[g])) continue;
    if (group_hits[g] == count) {
      out.base += weight;
    } else if (group_hits[g] + 1 == count) {
      out.base += weight;
      near_total += weight;
    } else {
      return std::nullopt;
    }
  }
  for (std::size_t j = 0; j < count; ++j) {
    out.size.push_back(family.members()[j].size());
    out.missing.push_back((near_total - held_near[j]) % p);
  }
  out.base %= p;
  return out;
}

std::uint64_t rotate_residues(std::uint64_t mask, std::uint64_t by, std::uint64_t p) {
  by %= p;
  if (by == 0) return mask;
  const std::uint64_t full = p == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << p) - 1;
  return ((mask << by) | (mask >> (p - by))) & full;
}

// Lexicographically first violating index tuple (preorder), found greedily
// from reachability tables instead of by enumeration.
std::optional<Violation> first_violation_nearly_universal(const SetFamily& family, const NearlyUniversal& shape,
                                                          const Pattern& pattern, std::size_t depth,
                                                          std::uint64_t& nodes) {
  const auto p = pattern.modulus();
  const auto count = shape.missing.size();
  // reach[i * (depth + 1) + c]: residues of sums of c missing weights drawn from indices >= i.
  std::vector<std::uint64_t> reach((count + 1) * (depth + 1), 0);
  const auto at = [&](std::size_t i, std::size_t c) -> std::uint64_t& { return reach[i * (depth + 1) + c]; };
  at(count, 0) = 1;
  for (std::size_t i = count; i-- > 0;) {
    at(i, 0) = 1;
    for (std::size_t c = 1; c <= depth; ++c) {
      at(i, c) = at(i + 1, c) | rotate_residues(at(i + 1, c - 1), shape.missing[i], p);
    }
  }
  nodes = reach.size();
  const auto rejects = [&](std::size_t level, std::uint64_t sum) {
    return !pattern.accepts(level, (shape.base + p - sum % p) % p);
  };
  // Some proper extension of a prefix (length len >= 1, residue sum) by
  // members from indices >= from violates.
  const auto violation_below = [&](std::size_t len, std::uint64_t sum, std::size_t from) {
    for (std::size_t extra = 1; len + extra <= depth; ++extra) {
      const auto mask = rotate_residues(at(from, extra), sum, p);
      for (std::uint64_t r = 0; r < p; ++r) {
        if (((mask >> r) & 1U) && rejects(len + extra, r)) return true;
      }
    }
    return false;
  };

  std::vector<std::size_t> chosen;
  std::uint64_t sum = 0;
  std::size_t next = 0;
  while (chosen.size() < depth) {
    const auto len = chosen.size() + 1;
    for (std::size_t j = next; j < count; ++j) {
      const auto with_j = (sum + shape.missing[j]) % p;
      const bool here = len == 1 ? !pattern.accepts(1, shape.size[j]) : rejects(len, with_j);
      if (here) {
        chosen.push_back(j);
        Member common = family.members()[chosen[0]];
        for (std::size_t r = 1; r < chosen.size(); ++r) {
          const auto& other = family.members()[chosen[r]];
          Member next_common;
          std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                                std::back_inserter(next_common));
          common = std::move(next_common);
        }
        return Violation{len, one_based(chosen), common.size(), pattern.entries()[len - 1]};
      }
      if (!violation_below(len, with_j, j + 1)) continue;
      chosen.push_back(j);
      sum = with_j;
      next = j + 1;
      break;
    }
    if (chosen.size() != len) break;
  }
  if (!chosen.empty()) throw Error(ErrorKind::kInternal, "reachability table and greedy walk disagree");
  return std::nullopt;
}

}  // namespace

IntersectionProfile intersection_profile(const SetFamily& family, std::size_t depth,
                                         std::uint64_t node_budget) {
  if (depth < 1) throw_invalid("profile depth must be at least 1");
  IntersectionProfile profile;
  profile.depth = depth;
  profile.vacuous_from = vacuous_level(family.size(), depth);
  const std::size_t levels = std::min(depth, family.size());
  for (std::size_t l = 1; l <= levels; ++l) profile.levels.push_back({l, {}});

  const auto p = family.modulus();
  IntersectionWalker walker(family);
  const auto status = walker.walk(depth, node_budget, profile.nodes,
                                  [&](std::size_t level, std::span<const std::size_t> indices, std::uint64_t size) {
                                    auto& witnesses = profile.levels[level - 1].witnesses;
                                    witnesses.try_emplace(size % p, one_based(indices));
                                    return true;
                                  });
  profile.complete = status == WalkStatus::kComplete;
  return profile;
}

bool profile_compatible(const IntersectionProfile& profile, const Pattern& pattern) {
  if (pattern.length() < profile.levels.size()) {
    throw_invalid("profile is deeper than the pattern");
  }
  for (const auto& level : profile.levels) {
    for (const auto& [residue, witness] : level.witnesses) {
      if (!pattern.accepts(level.level, residue)) return false;
    }
  }
  return true;
}

VerificationOutcome verify_pattern(const SetFamily& family, const Pattern& pattern,
                                   std::optional<std::size_t> depth, std::uint64_t node_budget) {
  if (family.modulus() != pattern.modulus()) {
    throw_invalid("family modulus " + std::to_string(family.modulus()) +
                  " differs from pattern modulus " + std::to_string(pattern.modulus()));
  }
  const std::size_t requested = std::min(depth.value_or(pattern.length()), pattern.length());
  if (requested < 1) throw_invalid("verification depth must be at least 1");

  VerificationOutcome outcome;
  outcome.requested_depth = requested;
  outcome.checked_depth = std::min(requested, family.size());
  outcome.vacuous_from = vacuous_level(family.size(), requested);

  if (const auto shape = nearly_universal(family)) {
    outcome.violation = first_violation_nearly_universal(family, *shape, pattern, outcome.checked_depth, outcome.nodes);
    outcome.verdict = outcome.violation ? Verdict::kFail : Verdict::kPass;
    return outcome;
  }

  IntersectionWalker walker(family);
  const auto status = walker.walk(requested, node_budget, outcome.nodes,
                                  [&](std::size_t level, std::span<const std::size_t> indices, std::uint64_t size) {
                                    if (pattern.accepts(level, size)) return true;
                                    outcome.violation = Violation{level, one_based(indices), size,
                                                                  pattern.entries()[level - 1]};
                                    return false;
                                  });
  switch (status) {
    case WalkStatus::kComplete:
      outcome.verdict = Verdict::kPass;
      break;
    case WalkStatus::kStopped:
      outcome.verdict = Verdict::kFail;
      break;
    case WalkStatus::kBudgetExhausted:
      outcome.verdict = Verdict::kBudgetExhausted;
      break;
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// JSON codec

nlohmann::json family_to_json(const SetFamily& family) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& member : family.members()) members.push_back(member);
  return {{"modulus", family.modulus()}, {"ground_size", family.ground_size()}, {"members", std::move(members)}};
}

namespace {

std::uint64_t require_unsigned(const nlohmann::json& document, const char* key) {
  const auto it = document.find(key);
  if (it == document.end()) throw_invalid(std::string("family document: missing key \"") + key + "\"");
  if (!it->is_number_unsigned()) {
    throw_invalid(std::string("family document: \"") + key + "\" must be a nonnegative integer");
  }
  return it->get<std::uint64_t>();
}

}  // namespace

SetFamily family_from_json(const nlohmann::json& document) {
  if (!document.is_object()) throw_invalid("family document: expected a JSON object");
  for (const auto& [key, value] : document.items()) {
    if (key != "modulus" && key != "ground_size" && key != "members" && key != "provenance" &&
        key != "invocation") {
      throw_invalid("family document: unexpected key \"" + key + "\"");
    }
  }
  const auto modulus = require_unsigned(document, "modulus");
  const auto ground = require_unsigned(document, "ground_size");
  require_prime(modulus);
  const auto it = document.find("members");
  if (it == document.end() || !it->is_array()) throw_invalid("family document: \"members\" must be an array");

  std::vector<Member> members;
  members.reserve(it->size());
  std::map<Member, std::size_t> seen;
  for (std::size_t j = 0; j < it->size(); ++j) {
    const auto& raw = (*it)[j];
    const std::string where = "members[" + std::to_string(j) + "]";
    if (!raw.is_array()) throw_invalid("family document: " + where + " must be an array");
    Member member;
    for (std::size_t e = 0; e < raw.size(); ++e) {
      const auto& value = raw[e];
      if (!value.is_number_unsigned() || value.get<std::uint64_t>() < 1 || value.get<std::uint64_t>() > ground) {
        throw_invalid("family document: " + where + "[" + std::to_string(e) + "] is not an element of [1, " +
                      std::to_string(ground) + "]");
      }
      member.push_back(value.get<std::uint32_t>());
    }
    std::sort(member.begin(), member.end());
    if (std::adjacent_find(member.begin(), member.end()) != member.end()) {
      throw_invalid("family document: " + where + " repeats an element");
    }
    const auto [pos, inserted] = seen.emplace(member, j);
    if (!inserted) {
      throw_invalid("family document: " + where + " duplicates members[" + std::to_string(pos->second) + "]");
    }
    members.push_back(std::move(member));
  }
  return SetFamily(ground, modulus, std::move(members));
}

std::string dump_document(const nlohmann::json& document) { return document.dump() + "\n"; }

SetFamily parse_family(const std::string& text) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_invalid("family document: malformed JSON at byte " + std::to_string(e.byte));
  }
  return family_from_json(document);
}

std::string serialize_family(const SetFamily& family, const nlohmann::json& provenance) {
  auto document = family_to_json(family);
  if (!provenance.is_null()) document["provenance"] = provenance;
  return dump_document(document);
}

nlohmann::json to_json(const IntersectionProfile& profile) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : profile.levels) {
    nlohmann::json witnesses = nlohmann::json::array();
    for (const auto& [residue, members] : level.witnesses) {
      witnesses.push_back({{"residue", residue}, {"members", members}});
    }
    levels.push_back({{"level", level.level}, {"realized", std::move(witnesses)}});
  }
  return {{"depth", profile.depth},
          {"levels", std::move(levels)},
          {"vacuous_from", profile.vacuous_from ? nlohmann::json(*profile.vacuous_from) : nlohmann::json()},
          {"complete", profile.complete},
          {"nodes", profile.nodes}};
}

nlohmann::json to_json(const VerificationOutcome& outcome) {
  nlohmann::json result = {
      {"verdict", outcome.verdict == Verdict::kPass   ? "pass"
                  : outcome.verdict == Verdict::kFail ? "fail"
                                                      : "budget-exhausted"},
      {"requested_depth", outcome.requested_depth},
      {"checked_depth", outcome.checked_depth},
      {"vacuous_from", outcome.vacuous_from ? nlohmann::json(*outcome.vacuous_from) : nlohmann::json()},
      {"nodes", outcome.nodes},
  };
  if (outcome.violation) {
    const auto& v = *outcome.violation;
    result["violation"] = {{"level", v.level},
                           {"members", v.members},
                           {"size", v.size},
                           {"expected", v.expected == Pattern::kStar ? nlohmann::json("*") : nlohmann::json(v.expected)}};
  }
  return result;
}

}  // namespace alphatown
