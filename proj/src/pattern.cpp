#include "alphatown/pattern.hpp"

#include <algorithm>
#include <charconv>

#include "alphatown/arith.hpp"
#include "alphatown/error.hpp"

namespace alphatown {

namespace {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t p) {
  // p is prime and a is a nonzero residue: a^(p-2).
  std::uint64_t result = 1;
  std::uint64_t base = a % p;
  std::uint64_t e = p - 2;
  while (e > 0) {
    if (e & 1U) result = static_cast<std::uint64_t>(static_cast<unsigned __int128>(result) * base % p);
    base = static_cast<std::uint64_t>(static_cast<unsigned __int128>(base) * base % p);
    e >>= 1U;
  }
  return result;
}

void require_star_free(const Pattern& pattern, std::string_view what) {
  if (pattern.has_star()) throw_invalid(std::string(what) + ": star entries are not allowed");
}

using Matrix = std::vector<std::vector<std::uint64_t>>;

// In-place reduced row echelon form over F_p; returns pivot columns.
std::vector<std::size_t> reduce_rows(Matrix& rows, std::size_t columns, std::uint64_t p) {
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
  auto mulmod = [p](std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
  };
  for (std::size_t col = 0; col < columns && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    const std::uint64_t inv = inverse_mod(rows[rank][col], p);
    for (auto& value : rows[rank]) value = mulmod(value, inv);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      const std::uint64_t factor = rows[r][col];
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        rows[r][c] = (rows[r][c] + p - mulmod(factor, rows[rank][c])) % p;
      }
    }
    pivots.push_back(col);
    ++rank;
  }
  return pivots;
}

}  // namespace

Pattern::Pattern(std::uint64_t modulus, std::vector<std::int64_t> entries)
    : modulus_(modulus), entries_(std::move(entries)) {
  require_prime(modulus_);
  if (entries_.empty()) throw_invalid("pattern must have at least one entry");
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    const auto value = entries_[j];
    if (value == kStar) {
      if (modulus_ == 2) {
        throw_invalid("star entries need modulus >= 3 (position " + std::to_string(j + 1) + ")");
      }
      continue;
    }
    if (value < 0 || static_cast<std::uint64_t>(value) >= modulus_) {
      throw_invalid("pattern entry " + std::to_string(value) + " at position " +
                    std::to_string(j + 1) + " is not a residue mod " + std::to_string(modulus_));
    }
  }
}

Pattern Pattern::parse(std::string_view text, std::uint64_t modulus) {
  std::vector<std::int64_t> entries;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto token = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (token == "*") {
      entries.push_back(kStar);
    } else {
      std::int64_t value = 0;
      const auto* end = token.data() + token.size();
      const auto [ptr, ec] = std::from_chars(token.data(), end, value);
      if (token.empty() || ec != std::errc() || ptr != end || value < 0) {
        throw_invalid("malformed pattern entry '" + std::string(token) + "' in \"" +
                      std::string(text) + "\"");
      }
      entries.push_back(value);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Pattern(modulus, std::move(entries));
}

std::string Pattern::to_string() const {
  std::string out;
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    if (j > 0) out += ',';
    out += entries_[j] == kStar ? std::string("*") : std::to_string(entries_[j]);
  }
  return out;
}

bool Pattern::is_star(std::size_t position) const {
  if (position < 1 || position > entries_.size()) {
    throw_invalid("pattern position " + std::to_string(position) + " out of range");
  }
  return entries_[position - 1] == kStar;
}

std::uint64_t Pattern::residue(std::size_t position) const {
  if (is_star(position)) {
    throw_invalid("position " + std::to_string(position) + " holds a star, not a residue");
  }
  return static_cast<std::uint64_t>(entries_[position - 1]);
}

bool Pattern::has_star() const noexcept {
  return std::find(entries_.begin(), entries_.end(), kStar) != entries_.end();
}

bool Pattern::accepts(std::size_t level, std::uint64_t size) const {
  const std::uint64_t r = size % modulus_;
  const auto entry = entries_.at(level - 1);
  if (entry == kStar) return r != 0;
  return r == static_cast<std::uint64_t>(entry);
}

Pattern Pattern::with_stars_as(std::uint64_t residue) const {
  auto entries = entries_;
  for (auto& value : entries) {
    if (value == kStar) value = static_cast<std::int64_t>(residue % modulus_);
  }
  return Pattern(modulus_, std::move(entries));
}

bool Pattern::is_constant() const noexcept {
  if (has_star()) return false;
  return std::adjacent_find(entries_.begin(), entries_.end(), std::not_equal_to<>()) ==
         entries_.end();
}

Pattern Pattern::window(std::size_t first, std::size_t count) const {
  if (first < 1 || count == 0 || first - 1 + count > entries_.size()) {
    throw_invalid("window out of range");
  }
  const auto begin = entries_.begin() + static_cast<std::ptrdiff_t>(first - 1);
  return Pattern(modulus_, std::vector<std::int64_t>(begin, begin + static_cast<std::ptrdiff_t>(count)));
}

Pattern epsilon(std::size_t s, std::size_t k, std::uint64_t p) {
  if (s < 1 || s > k) {
    throw_invalid("epsilon position " + std::to_string(s) + " outside [1, " + std::to_string(k) + "]");
  }
  std::vector<std::int64_t> entries(k, 0);
  entries[s - 1] = 1;
  return Pattern(p, std::move(entries));
}

Pattern dot_epsilon(std::size_t s, std::size_t step, std::size_t k, std::uint64_t p) {
  if (step < 1 || s < 1 || s > step) {
    throw_invalid("dot_epsilon needs 1 <= s <= step (got s=" + std::to_string(s) +
                  ", step=" + std::to_string(step) + ")");
  }
  if (k < 1) throw_invalid("pattern length must be positive");
  std::vector<std::int64_t> entries(k, 0);
  for (std::size_t pos = s; pos <= k; pos += step) entries[pos - 1] = 1;
  return Pattern(p, std::move(entries));
}

Pattern all_equal(std::uint64_t residue, std::size_t k, std::uint64_t p) {
  return Pattern(p, std::vector<std::int64_t>(k, static_cast<std::int64_t>(residue)));
}

Pattern combine(const std::vector<std::pair<std::uint64_t, Pattern>>& terms) {
  if (terms.empty()) throw_invalid("combine needs at least one term");
  const auto p = terms.front().second.modulus();
  const auto k = terms.front().second.length();
  std::vector<std::int64_t> sum(k, 0);
  for (const auto& [coefficient, pattern] : terms) {
    if (pattern.modulus() != p || pattern.length() != k) {
      throw_invalid("combine: patterns differ in length or modulus");
    }
    require_star_free(pattern, "combine");
    const auto c = coefficient % p;
    for (std::size_t j = 0; j < k; ++j) {
      sum[j] = static_cast<std::int64_t>(
          (static_cast<std::uint64_t>(sum[j]) + c * static_cast<std::uint64_t>(pattern.entries()[j])) % p);
    }
  }
  return Pattern(p, std::move(sum));
}

std::optional<Decomposition> decompose_in_span(const Pattern& target,
                                               const std::vector<Pattern>& basis) {
  require_star_free(target, "decompose_in_span");
  const auto p = target.modulus();
  const auto k = target.length();
  for (const auto& vector : basis) {
    if (vector.modulus() != p || vector.length() != k) {
      throw_invalid("decompose_in_span: basis vector differs in length or modulus");
    }
    require_star_free(vector, "decompose_in_span");
  }
  // Rows are pattern positions; columns are basis vectors plus the target.
  const std::size_t columns = basis.size();
  Matrix rows(k, std::vector<std::uint64_t>(columns + 1, 0));
  for (std::size_t pos = 0; pos < k; ++pos) {
    for (std::size_t c = 0; c < columns; ++c) {
      rows[pos][c] = static_cast<std::uint64_t>(basis[c].entries()[pos]);
    }
    rows[pos][columns] = static_cast<std::uint64_t>(target.entries()[pos]);
  }
  const auto pivots = reduce_rows(rows, columns + 1, p);
  if (!pivots.empty() && pivots.back() == columns) return std::nullopt;

  Decomposition result{basis, std::vector<std::uint64_t>(columns, 0)};
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    result.coefficients[pivots[r]] = rows[r][columns];
  }
  return result;
}

std::size_t span_rank(const std::vector<Pattern>& vectors) {
  if (vectors.empty()) return 0;
  const auto p = vectors.front().modulus();
  const auto k = vectors.front().length();
  Matrix rows;
  rows.reserve(vectors.size());
  for (const auto& vector : vectors) {
    if (vector.modulus() != p || vector.length() != k) {
      throw_invalid("span_rank: vectors differ in length or modulus");
    }
    require_star_free(vector, "span_rank");
    std::vector<std::uint64_t> row;
    for (auto value : vector.entries()) row.push_back(static_cast<std::uint64_t>(value));
    rows.push_back(std::move(row));
  }
  return reduce_rows(rows, k, p).size();
}

std::vector<Pattern> theorem_basis(std::size_t k, std::size_t level, std::uint64_t p,
                                   BasisKind kind) {
  require_prime(p);
  if (level < 1) throw_invalid("basis level must be positive");
  const auto q = static_cast<std::size_t>(checked_pow(p, level));
  // eps_i with i > k is the zero vector once truncated to length k.
  auto unit = [&](std::size_t i) {
    return i <= k ? epsilon(i, k, p) : all_equal(0, k, p);
  };
  std::vector<Pattern> basis;
  if (kind == BasisKind::kFull) {
    if (k != 2 * q) {
      throw_invalid("full basis at level " + std::to_string(level) + " needs k = " +
                    std::to_string(2 * q) + " (got " + std::to_string(k) + ")");
    }
    for (std::size_t i = 1; i <= q; ++i) basis.push_back(unit(i));
    for (std::size_t j = 1; j + 1 <= q; ++j) basis.push_back(dot_epsilon(j, q, k, p));
    basis.push_back(all_equal(1, k, p));
  } else {
    for (std::size_t i = 1; i + 1 <= q; ++i) basis.push_back(unit(i));
    for (std::size_t j = 1; j <= q; ++j) basis.push_back(dot_epsilon(j, q, k, p));
  }
  return basis;
}

}  // namespace alphatown
