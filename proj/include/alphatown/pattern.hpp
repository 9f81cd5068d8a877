#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace alphatown {

/// Required intersection residues (a_1, ..., a_k) modulo a prime p.
///
/// Positions are 1-based, matching the usual [k] indexing of the entries.
/// An entry is either a residue in [0, p-1] or the star symbol, which asks
/// for intersection sizes that are nonzero mod p. Stars are only accepted
/// for p >= 3.
class Pattern {
 public:
  /// Raw entry value used for the star symbol.
  static constexpr std::int64_t kStar = -1;

  Pattern(std::uint64_t modulus, std::vector<std::int64_t> entries);

  /// Parses "0,1,0,0" or "2,*,0" (whitespace around entries is ignored).
  [[nodiscard]] static Pattern parse(std::string_view text, std::uint64_t modulus);

  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] std::uint64_t modulus() const noexcept { return modulus_; }
  [[nodiscard]] std::size_t length() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::vector<std::int64_t>& entries() const noexcept { return entries_; }

  [[nodiscard]] bool is_star(std::size_t position) const;
  /// Residue at a 1-based position; throws invalid-input on a star.
  [[nodiscard]] std::uint64_t residue(std::size_t position) const;
  [[nodiscard]] bool has_star() const noexcept;

  /// True when an l-wise intersection of this size satisfies entry l.
  [[nodiscard]] bool accepts(std::size_t level, std::uint64_t size) const;

  /// Copy with every star replaced by the given residue.
  [[nodiscard]] Pattern with_stars_as(std::uint64_t residue) const;

  /// True when all entries are the same residue (no stars).
  [[nodiscard]] bool is_constant() const noexcept;

  /// Sub-pattern of positions [first, first + count).
  [[nodiscard]] Pattern window(std::size_t first, std::size_t count) const;

  friend bool operator==(const Pattern&, const Pattern&) = default;

 private:
  std::uint64_t modulus_;
  std::vector<std::int64_t> entries_;
};

/// 1 at position s, 0 elsewhere.
[[nodiscard]] Pattern epsilon(std::size_t s, std::size_t k, std::uint64_t p);

/// 1 at positions s, s + step, s + 2*step, ... up to k.
[[nodiscard]] Pattern dot_epsilon(std::size_t s, std::size_t step, std::size_t k,
                                  std::uint64_t p);

[[nodiscard]] Pattern all_equal(std::uint64_t residue, std::size_t k, std::uint64_t p);

/// Entrywise sum of coefficient * pattern mod p. Terms must share (k, p)
/// and be star-free.
[[nodiscard]] Pattern combine(const std::vector<std::pair<std::uint64_t, Pattern>>& terms);

struct Decomposition {
  std::vector<Pattern> basis;
  std::vector<std::uint64_t> coefficients;
};

/// Solves sum c_i * basis_i = target over F_p by row reduction. Free
/// variables are set to zero, which gives the reduced-echelon solution when
/// the basis is dependent. Returns nullopt when target is not in the span.
[[nodiscard]] std::optional<Decomposition> decompose_in_span(
    const Pattern& target, const std::vector<Pattern>& basis);

/// Rank over F_p of a list of star-free patterns of equal shape.
[[nodiscard]] std::size_t span_rank(const std::vector<Pattern>& vectors);

enum class BasisKind { kFull, kSpan };

/// Generator sets used by the period dichotomy at level l (q = p^l):
///  - kFull (k must be 2q): eps_i for i in [q], dot_eps_{j,q} for j in [q-1],
///    then the all-one vector.
///  - kSpan (any k): eps_i for i in [q-1], dot_eps_{j,q} for j in [q].
[[nodiscard]] std::vector<Pattern> theorem_basis(std::size_t k, std::size_t level,
                                                 std::uint64_t p, BasisKind kind);

}  // namespace alphatown
