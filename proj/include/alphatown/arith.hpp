#pragma once

#include <cstdint>
#include <compare>

#include <boost/multiprecision/cpp_int.hpp>

namespace alphatown {

using BigInt = boost::multiprecision::cpp_int;

/// Exponent of a prime in some integer.
struct Valuation {
  std::uint64_t value = 0;

  friend auto operator<=>(const Valuation&, const Valuation&) = default;
};

/// Trial division up to sqrt(p).
[[nodiscard]] bool is_prime(std::uint64_t p);

/// Throws invalid-input unless p is prime.
void require_prime(std::uint64_t p);

/// Legendre's formula: largest e with p^e | s!.
[[nodiscard]] Valuation factorial_valuation(std::uint64_t s, std::uint64_t p);

/// C(m, l) exactly; zero when l > m.
[[nodiscard]] BigInt binomial_exact(std::uint64_t m, std::uint64_t l);

/// C(m, l) mod p by Lucas' theorem (product of base-p digit binomials).
[[nodiscard]] std::uint64_t binomial_mod(std::uint64_t m, std::uint64_t l,
                                         std::uint64_t p);

/// p-adic valuation of C(m, l) by Kummer's theorem: the number of carries
/// when adding l and m - l in base p. Requires l <= m.
[[nodiscard]] Valuation binomial_valuation(std::uint64_t m, std::uint64_t l,
                                           std::uint64_t p);

/// min(C(m, l), cap + 1), computed without overflow.
[[nodiscard]] std::uint64_t binomial_capped(std::uint64_t m, std::uint64_t l,
                                            std::uint64_t cap);

/// p^e, throwing invalid-input when the result does not fit in 64 bits.
[[nodiscard]] std::uint64_t checked_pow(std::uint64_t p, std::uint64_t e);

/// Smallest x >= 0 with x^den >= n^num (exact ceiling of n^(num/den)).
[[nodiscard]] std::uint64_t ceil_rational_power(std::uint64_t n,
                                                std::uint64_t num,
                                                std::uint64_t den);

}  // namespace alphatown
