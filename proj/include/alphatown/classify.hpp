#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <nlohmann/json.hpp>

#include "alphatown/arith.hpp"
#include "alphatown/pattern.hpp"

namespace alphatown {

/// Exponent e of a polynomial growth rate n^e.
using Exponent = boost::rational<std::int64_t>;

/// "1/3", or "1" for integral values.
[[nodiscard]] std::string to_string(const Exponent& exponent);

struct ExactVerdict {
  std::string formula;   // e.g. "(2! n)^(1/2)" or "n^(1/3)"
  std::string theorem;   // rule tag, e.g. "last-nonconstant-position"
  std::string relation;  // "~" (asymptotic equality) or "Theta"
  Exponent exponent;
};

struct BoundEntry {
  /// Unused when exponential is set.
  Exponent exponent;
  /// Lower bound of order 2^(cn) rather than polynomial.
  bool exponential = false;
  nlohmann::json witness;
};

enum class DichotomySide { kSmall, kBig };

struct LevelFinding {
  std::size_t level = 0;
  std::uint64_t period = 0;  // p^level
  DichotomySide side = DichotomySide::kBig;
  /// kSmall: position j with a_j != a_{j+period}; the window is
  /// [j - period + 1, j + period].
  std::optional<std::size_t> position;
  /// kBig: coefficients over theorem_basis(k, level, p, kSpan).
  std::optional<Decomposition> decomposition;
};

struct ClassificationReport {
  Pattern pattern;
  std::optional<ExactVerdict> exact;
  std::vector<BoundEntry> upper;
  std::vector<BoundEntry> lower;
  /// One entry per level l >= 1 with 2 p^l <= k.
  std::vector<LevelFinding> levels;

  /// Smallest upper exponent, if any polynomial upper bound is known.
  [[nodiscard]] std::optional<Exponent> best_upper() const;
  /// Largest polynomial lower exponent.
  [[nodiscard]] std::optional<Exponent> best_lower() const;
  [[nodiscard]] bool exponential_lower() const;
};

/// Asymptotic classification from the known exact theorems, window scans
/// (upper bounds) and span memberships (lower bounds). Patterns with stars
/// are only classified in the shape a_l != 0 with zero tail and k >= 2l.
[[nodiscard]] ClassificationReport classify_pattern(const Pattern& pattern);

/// The first position j in [q, k - q] with a_j != a_{j+q}, q = p^level.
[[nodiscard]] std::optional<std::size_t> find_window(const Pattern& pattern, std::size_t level);

struct EnumerationSummary {
  std::size_t k = 0;
  std::size_t level = 0;
  std::uint64_t modulus = 0;
  BigInt count;
  /// p^(2 p^l - 1).
  BigInt theorem_bound;
  /// k < 2 p^l: every pattern is listed and the bound says nothing.
  bool vacuous = false;
};

/// Patterns of length k on the big side at the given level: free prefix of
/// length 2q - 1, then a_j = a_{j-q}. When k < 2q, every pattern. The visitor,
/// if given, receives the patterns in lexicographic order.
EnumerationSummary enumerate_big_patterns(std::size_t k, std::size_t level, std::uint64_t p,
                                          const std::function<void(const Pattern&)>& visit = {});

/// sum_{s=0}^{l} C(n, s).
[[nodiscard]] BigInt frankl_wilson_bound(std::uint64_t n, std::uint64_t l);

struct CountingBound {
  std::string rule;
  std::size_t t = 0;
  /// C(f, t) <= rhs for every family.
  std::uint64_t rhs = 0;
  std::uint64_t largest_f = 0;
};

struct BoundsReport {
  Pattern pattern;
  std::uint64_t n = 0;
  std::optional<CountingBound> counting;
  std::optional<BigInt> frankl_wilson;
  std::optional<BigInt> eventown_cap;
  ClassificationReport classification;

  /// Minimum over the numeric upper bounds, when any applies.
  [[nodiscard]] std::optional<BigInt> best_numeric_upper() const;
};

[[nodiscard]] BoundsReport bounds_report(const Pattern& pattern, std::uint64_t n);

[[nodiscard]] nlohmann::json to_json(const ClassificationReport& report);
[[nodiscard]] nlohmann::json to_json(const BoundsReport& report);
[[nodiscard]] nlohmann::json to_json(const EnumerationSummary& summary);

}  // namespace alphatown
