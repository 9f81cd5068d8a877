#include "alphatown/arith.hpp"

#include <limits>
#include <string>

#include "alphatown/error.hpp"

namespace alphatown {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % p);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t e, std::uint64_t p) {
  std::uint64_t result = 1 % p;
  base %= p;
  while (e > 0) {
    if (e & 1U) result = mul_mod(result, base, p);
    base = mul_mod(base, base, p);
    e >>= 1U;
  }
  return result;
}

// C(a, b) mod p for digits a, b < p; every factor is a unit mod p.
std::uint64_t small_binomial_mod(std::uint64_t a, std::uint64_t b,
                                 std::uint64_t p) {
  if (b > a) return 0;
  if (b > a - b) b = a - b;
  std::uint64_t num = 1;
  std::uint64_t den = 1;
  for (std::uint64_t j = 0; j < b; ++j) {
    num = mul_mod(num, a - j, p);
    den = mul_mod(den, j + 1, p);
  }
  return mul_mod(num, pow_mod(den, p - 2, p), p);
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return "invalid-input";
    case ErrorKind::kGroundTooSmall:
      return "ground-too-small";
    case ErrorKind::kBudgetExhausted:
      return "budget-exhausted";
    case ErrorKind::kInternal:
      return "internal-error";
  }
  return "internal-error";
}

bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  if (p < 4) return true;
  if (p % 2 == 0) return false;
  for (std::uint64_t d = 3; d <= p / d; d += 2) {
    if (p % d == 0) return false;
  }
  return true;
}

void require_prime(std::uint64_t p) {
  if (!is_prime(p)) throw_invalid("modulus " + std::to_string(p) + " is not prime");
}

Valuation factorial_valuation(std::uint64_t s, std::uint64_t p) {
  require_prime(p);
  std::uint64_t total = 0;
  while (s > 0) {
    s /= p;
    total += s;
  }
  return {total};
}

BigInt binomial_exact(std::uint64_t m, std::uint64_t l) {
  if (l > m) return 0;
  if (l > m - l) l = m - l;
  BigInt result = 1;
  for (std::uint64_t j = 1; j <= l; ++j) {
    result *= m - l + j;
    result /= j;
  }
  return result;
}

std::uint64_t binomial_mod(std::uint64_t m, std::uint64_t l, std::uint64_t p) {
  require_prime(p);
  std::uint64_t result = 1 % p;
  while (l > 0 || m > 0) {
    const std::uint64_t md = m % p;
    const std::uint64_t ld = l % p;
    if (ld > md) return 0;
    result = mul_mod(result, small_binomial_mod(md, ld, p), p);
    m /= p;
    l /= p;
  }
  return result;
}

Valuation binomial_valuation(std::uint64_t m, std::uint64_t l, std::uint64_t p) {
  require_prime(p);
  if (l > m) {
    throw_invalid("valuation of C(" + std::to_string(m) + ", " + std::to_string(l) +
                  ") = 0 is undefined");
  }
  std::uint64_t a = l;
  std::uint64_t b = m - l;
  std::uint64_t carry = 0;
  std::uint64_t carries = 0;
  while (a > 0 || b > 0 || carry > 0) {
    const std::uint64_t digit_sum = a % p + b % p + carry;
    carry = digit_sum >= p ? 1 : 0;
    carries += carry;
    a /= p;
    b /= p;
  }
  return {carries};
}

std::uint64_t binomial_capped(std::uint64_t m, std::uint64_t l, std::uint64_t cap) {
  if (l > m) return 0;
  if (l > m - l) l = m - l;
  const std::uint64_t over = cap == std::numeric_limits<std::uint64_t>::max() ? cap : cap + 1;
  // C(m, j) increases with j on [0, l] once l <= m/2, so stopping early is safe.
  u128 value = 1;
  for (std::uint64_t j = 0; j < l; ++j) {
    value = value * (m - j) / (j + 1);
    if (value > cap) return over;
  }
  return static_cast<std::uint64_t>(value);
}

std::uint64_t checked_pow(std::uint64_t p, std::uint64_t e) {
  std::uint64_t result = 1;
  for (std::uint64_t j = 0; j < e; ++j) {
    if (p != 0 && result > std::numeric_limits<std::uint64_t>::max() / p) {
      throw_invalid(std::to_string(p) + "^" + std::to_string(e) + " overflows");
    }
    result *= p;
  }
  return result;
}

std::uint64_t ceil_rational_power(std::uint64_t n, std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw_invalid("zero denominator in rational power");
  const BigInt target = boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(num));
  auto big_enough = [&](std::uint64_t x) {
    return boost::multiprecision::pow(BigInt(x), static_cast<unsigned>(den)) >= target;
  };
  std::uint64_t hi = 1;
  while (!big_enough(hi)) hi *= 2;
  std::uint64_t lo = 0;
  if (big_enough(lo)) return 0;
  // invariant: !big_enough(lo), big_enough(hi)
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (big_enough(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace alphatown
