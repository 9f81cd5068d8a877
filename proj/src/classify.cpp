#include "alphatown/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alphatown/error.hpp"

namespace alphatown {

namespace {

struct LastChange {
  std::size_t t = 0;       // last position whose entry differs from a_k; 0 if constant
  std::uint64_t tail = 0;  // a_k
};

LastChange last_change(const Pattern& pattern) {
  const auto k = pattern.length();
  LastChange result{0, pattern.residue(k)};
  for (std::size_t j = k; j >= 1; --j) {
    if (pattern.residue(j) != result.tail) {
      result.t = j;
      break;
    }
  }
  return result;
}

// Star shape: a_l nonzero (a star counts), zero afterwards, k >= 2l.
std::optional<std::size_t> star_shape_level(const Pattern& pattern) {
  std::size_t last = 0;
  for (std::size_t j = 1; j <= pattern.length(); ++j) {
    if (pattern.is_star(j) || pattern.residue(j) != 0) last = j;
  }
  if (last == 0 || pattern.length() < 2 * last) return std::nullopt;
  return last;
}

std::string growth_formula(std::size_t t, bool with_constant) {
  if (t == 1) return "n";
  const auto ts = std::to_string(t);
  return with_constant ? "(" + ts + "! n)^(1/" + ts + ")" : "n^(1/" + ts + ")";
}

ExactVerdict exact_at(std::size_t t, bool asymptotic, std::string theorem) {
  return {growth_formula(t, asymptotic), std::move(theorem), asymptotic ? "~" : "Theta",
          Exponent(1, static_cast<std::int64_t>(t))};
}

// p^level, or nullopt once it exceeds cap.
std::optional<std::uint64_t> period_up_to(std::uint64_t p, std::size_t level, std::uint64_t cap) {
  std::uint64_t q = 1;
  for (std::size_t e = 0; e < level; ++e) {
    if (q > cap / p) return std::nullopt;
    q *= p;
  }
  return q <= cap ? std::optional<std::uint64_t>(q) : std::nullopt;
}

nlohmann::json big_to_json(const BigInt& value) {
  if (value <= std::numeric_limits<std::uint64_t>::max()) return value.convert_to<std::uint64_t>();
  return value.str();
}

nlohmann::json decomposition_to_json(const Decomposition& decomposition) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t j = 0; j < decomposition.basis.size(); ++j) {
    if (decomposition.coefficients[j] == 0) continue;
    terms.push_back({{"coefficient", decomposition.coefficients[j]},
                     {"generator", decomposition.basis[j].to_string()}});
  }
  return terms;
}

// Names the span generators the same way for every level.
std::vector<std::string> span_generator_names(std::size_t q) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i < q; ++i) names.push_back("eps_" + std::to_string(i));
  for (std::size_t j = 1; j <= q; ++j) names.push_back("dot_eps_" + std::to_string(j) + "," + std::to_string(q));
  return names;
}

nlohmann::json named_decomposition(const Decomposition& decomposition, std::size_t q) {
  auto terms = decomposition_to_json(decomposition);
  const auto names = span_generator_names(q);
  std::size_t at = 0;
  for (std::size_t j = 0; j < decomposition.basis.size(); ++j) {
    if (decomposition.coefficients[j] == 0) continue;
    terms[at++]["name"] = names[j];
  }
  return terms;
}

}  // namespace

std::string to_string(const Exponent& exponent) {
  if (exponent.denominator() == 1) return std::to_string(exponent.numerator());
  return std::to_string(exponent.numerator()) + "/" + std::to_string(exponent.denominator());
}

std::optional<std::size_t> find_window(const Pattern& pattern, std::size_t level) {
  const auto k = pattern.length();
  const auto q = period_up_to(pattern.modulus(), level, k / 2);
  if (!q) return std::nullopt;
  for (std::size_t j = *q; j + *q <= k; ++j) {
    if (pattern.is_star(j) || pattern.is_star(j + *q)) continue;
    if (pattern.residue(j) != pattern.residue(j + *q)) return j;
  }
  return std::nullopt;
}

std::optional<Exponent> ClassificationReport::best_upper() const {
  std::optional<Exponent> best;
  for (const auto& entry : upper) {
    if (!entry.exponential && (!best || entry.exponent < *best)) best = entry.exponent;
  }
  return best;
}

std::optional<Exponent> ClassificationReport::best_lower() const {
  std::optional<Exponent> best;
  for (const auto& entry : lower) {
    if (!entry.exponential && (!best || entry.exponent > *best)) best = entry.exponent;
  }
  return best;
}

bool ClassificationReport::exponential_lower() const {
  return std::any_of(lower.begin(), lower.end(), [](const BoundEntry& e) { return e.exponential; });
}

ClassificationReport classify_pattern(const Pattern& pattern) {
  ClassificationReport report{pattern, std::nullopt, {}, {}, {}};
  const auto k = pattern.length();
  const auto p = pattern.modulus();

  if (pattern.has_star()) {
    if (const auto level = star_shape_level(pattern)) {
      const bool sharp = pattern.is_star(*level) || pattern.residue(*level) == 1;
      report.exact = exact_at(*level, sharp, "star-last-nonzero");
      const nlohmann::json witness = {{"theorem", "star-last-nonzero"}, {"t", *level}};
      report.upper.push_back({report.exact->exponent, false, witness});
      report.lower.push_back({report.exact->exponent, false, witness});
    }
    return report;
  }

  const auto change = last_change(pattern);
  if (change.t != 0 && k >= 2 * change.t) {
    const auto gap = (pattern.residue(change.t) + p - change.tail) % p;
    report.exact = exact_at(change.t, gap == 1, "last-nonconstant-position");
  } else {
    for (std::size_t level = 1;; ++level) {
      const auto q = period_up_to(p, level, k / 2);
      if (!q) break;
      if (2 * *q == k && pattern.residue(*q) != pattern.residue(2 * *q)) {
        report.exact = exact_at(*q, p == 2, "period-dichotomy");
        break;
      }
    }
  }
  if (report.exact) {
    const nlohmann::json witness = {{"theorem", report.exact->theorem}};
    report.upper.push_back({report.exact->exponent, false, witness});
    report.lower.push_back({report.exact->exponent, false, witness});
  }

  // Upper bounds: a window of length 2q whose positions q and 2q differ.
  for (std::size_t level = 0;; ++level) {
    const auto q = period_up_to(p, level, k / 2);
    if (!q) break;
    if (const auto j = find_window(pattern, level)) {
      report.upper.push_back({Exponent(1, static_cast<std::int64_t>(*q)), false,
                              {{"rule", "window"},
                               {"level", level},
                               {"position", *j},
                               {"window", {*j - *q + 1, *j + *q}},
                               {"subpattern", pattern.window(*j - *q + 1, 2 * *q).to_string()}}});
    }
  }

  // Lower bounds.
  if (change.t == 0) {
    report.lower.push_back({Exponent(0), true, {{"rule", "constant"}, {"residue", change.tail}}});
  }
  std::size_t last_nonzero = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    if (pattern.residue(j) != 0) last_nonzero = j;
  }
  if (last_nonzero != 0) {
    report.lower.push_back({Exponent(1, static_cast<std::int64_t>(last_nonzero)), false,
                            {{"rule", "unit-decomposition"}, {"t", last_nonzero}}});
  }
  for (std::size_t level = 1;; ++level) {
    const auto q = period_up_to(p, level, k);
    if (!q) break;
    const auto basis = theorem_basis(k, level, p, BasisKind::kSpan);
    if (const auto decomposition = decompose_in_span(pattern, basis)) {
      report.lower.push_back({Exponent(1, static_cast<std::int64_t>(*q - 1)), false,
                              {{"rule", "span"}, {"level", level}, {"terms", named_decomposition(*decomposition, *q)}}});
    }
  }

  // Per-level dichotomy.
  for (std::size_t level = 1;; ++level) {
    const auto q = period_up_to(p, level, k / 2);
    if (!q) break;
    LevelFinding finding{level, *q, DichotomySide::kBig, std::nullopt, std::nullopt};
    if (const auto j = find_window(pattern, level)) {
      finding.side = DichotomySide::kSmall;
      finding.position = j;
    } else {
      finding.decomposition = decompose_in_span(pattern, theorem_basis(k, level, p, BasisKind::kSpan));
      if (!finding.decomposition) {
        throw Error(ErrorKind::kInternal,
                    "periodic pattern " + pattern.to_string() + " outside the level-" + std::to_string(level) + " span");
      }
    }
    report.levels.push_back(std::move(finding));
  }
  return report;
}

EnumerationSummary enumerate_big_patterns(std::size_t k, std::size_t level, std::uint64_t p,
                                          const std::function<void(const Pattern&)>& visit) {
  require_prime(p);
  if (k < 1) throw_invalid("pattern length must be positive");
  EnumerationSummary summary;
  summary.k = k;
  summary.level = level;
  summary.modulus = p;

  const auto q = period_up_to(p, level, k / 2);
  summary.vacuous = !q;
  const std::size_t free = q ? 2 * *q - 1 : k;
  summary.count = pow(BigInt(p), static_cast<unsigned>(free));
  if (q) {
    summary.theorem_bound = summary.count;
  } else {
    // 2 p^level - 1 may be astronomically large; report it only when it fits.
    const auto big_q = period_up_to(p, level, std::numeric_limits<std::uint32_t>::max() / 4);
    summary.theorem_bound = big_q ? pow(BigInt(p), static_cast<unsigned>(2 * *big_q - 1)) : BigInt(-1);
  }
  if (!visit) return summary;

  std::vector<std::int64_t> entries(k, 0);
  while (true) {
    for (std::size_t j = free; j < k; ++j) entries[j] = entries[j - *q];
    visit(Pattern(p, entries));
    std::size_t j = free;
    while (j > 0 && entries[j - 1] == static_cast<std::int64_t>(p - 1)) entries[--j] = 0;
    if (j == 0) break;
    ++entries[j - 1];
  }
  return summary;
}

BigInt frankl_wilson_bound(std::uint64_t n, std::uint64_t l) {
  BigInt total = 0;
  for (std::uint64_t s = 0; s <= l; ++s) total += binomial_exact(n, s);
  return total;
}

std::optional<BigInt> BoundsReport::best_numeric_upper() const {
  std::optional<BigInt> best;
  const auto consider = [&](const BigInt& value) {
    if (!best || value < *best) best = value;
  };
  if (counting) consider(counting->largest_f);
  if (frankl_wilson) consider(*frankl_wilson);
  if (eventown_cap) consider(*eventown_cap);
  return best;
}

BoundsReport bounds_report(const Pattern& pattern, std::uint64_t n) {
  BoundsReport report{pattern, n, std::nullopt, std::nullopt, std::nullopt, classify_pattern(pattern)};
  const auto k = pattern.length();
  const auto p = pattern.modulus();

  // The t-wise intersections of an extremal family are distinct and form a
  // two-residue family, so C(f, t) is at most its size bound.
  std::optional<std::size_t> t;
  bool oddtown = false;
  if (pattern.has_star()) {
    t = star_shape_level(pattern);
  } else {
    const auto change = last_change(pattern);
    if (change.t != 0 && k >= 2 * change.t) {
      t = change.t;
      oddtown = p == 2 && change.tail == 0;
    }
  }
  if (t) {
    CountingBound bound{oddtown ? "oddtown-trace" : "frankl-wilson-trace", *t, oddtown ? n : n + 1, 0};
    std::uint64_t lo = *t;  // C(t, t) = 1 <= rhs
    std::uint64_t hi = bound.rhs + *t + 1;
    while (hi - lo > 1) {
      const auto mid = lo + (hi - lo) / 2;
      if (binomial_capped(mid, *t, bound.rhs) <= bound.rhs) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    bound.largest_f = lo;
    report.counting = bound;
  }

  if (k >= 2) {
    const bool first_star = pattern.is_star(1);
    const bool second_star = pattern.is_star(2);
    const bool differ = (!first_star && !second_star && pattern.residue(1) != pattern.residue(2)) ||
                        (first_star && !second_star && pattern.residue(2) == 0);
    if (differ) report.frankl_wilson = frankl_wilson_bound(n, 1);
    if (p == 2 && pattern.residue(1) == pattern.residue(2)) {
      const auto exponent = pattern.residue(1) == 0 ? n / 2 : (n + 1) / 2;
      report.eventown_cap = BigInt(1) << static_cast<unsigned>(exponent);
    }
  }
  return report;
}

nlohmann::json to_json(const ClassificationReport& report) {
  const auto entries = [](const std::vector<BoundEntry>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& entry : list) {
      out.push_back({{"exponent", entry.exponential ? "exponential" : to_string(entry.exponent)},
                     {"witness", entry.witness}});
    }
    return out;
  };
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& finding : report.levels) {
    nlohmann::json item = {{"level", finding.level}, {"period", finding.period}};
    if (finding.side == DichotomySide::kSmall) {
      item["side"] = "small";
      item["exponent"] = to_string(Exponent(1, static_cast<std::int64_t>(finding.period)));
      item["witness"] = {{"position", *finding.position},
                         {"window", {*finding.position - finding.period + 1, *finding.position + finding.period}}};
    } else {
      item["side"] = "big";
      item["exponent"] = to_string(Exponent(1, static_cast<std::int64_t>(finding.period - 1)));
      item["witness"] = {{"terms", named_decomposition(*finding.decomposition, finding.period)}};
    }
    levels.push_back(std::move(item));
  }
  nlohmann::json exact;
  if (report.exact) {
    exact = {{"formula", report.exact->formula},
             {"theorem", report.exact->theorem},
             {"relation", report.exact->relation},
             {"exponent", to_string(report.exact->exponent)}};
  }
  const auto best_upper = report.best_upper();
  const auto best_lower = report.best_lower();
  return {
      {"pattern", report.pattern.to_string()},
      {"modulus", report.pattern.modulus()},
      {"exact", exact},
      {"upper", entries(report.upper)},
      {"lower", entries(report.lower)},
      {"levels", levels},
      {"best_upper", best_upper ? nlohmann::json(to_string(*best_upper)) : nlohmann::json()},
      {"best_lower", best_lower ? nlohmann::json(to_string(*best_lower)) : nlohmann::json()},
      {"exponential_lower", report.exponential_lower()},
  };
}

nlohmann::json to_json(const BoundsReport& report) {
  nlohmann::json counting;
  if (report.counting) {
    counting = {{"rule", report.counting->rule},
                {"t", report.counting->t},
                {"rhs", report.counting->rhs},
                {"largest_f", report.counting->largest_f}};
  }
  const auto at_n = [&](const std::optional<Exponent>& exponent) {
    if (!exponent) return nlohmann::json();
    const auto value = std::pow(static_cast<double>(report.n), boost::rational_cast<double>(*exponent));
    return nlohmann::json{{"exponent", to_string(*exponent)}, {"value", value}};
  };
  const auto best = report.best_numeric_upper();
  return {
      {"pattern", report.pattern.to_string()},
      {"modulus", report.pattern.modulus()},
      {"n", report.n},
      {"counting", counting},
      {"frankl_wilson", report.frankl_wilson ? big_to_json(*report.frankl_wilson) : nlohmann::json()},
      {"eventown_cap", report.eventown_cap ? big_to_json(*report.eventown_cap) : nlohmann::json()},
      {"best_numeric_upper", best ? big_to_json(*best) : nlohmann::json()},
      {"exponents_at_n",
       {{"upper", at_n(report.classification.best_upper())},
        {"lower", at_n(report.classification.best_lower())},
        {"exponential_lower", report.classification.exponential_lower()}}},
  };
}

nlohmann::json to_json(const EnumerationSummary& summary) {
  return {
      {"k", summary.k},
      {"ell", summary.level},
      {"modulus", summary.modulus},
      {"count", big_to_json(summary.count)},
      {"theorem_bound", summary.theorem_bound < 0 ? nlohmann::json() : big_to_json(summary.theorem_bound)},
      {"vacuous", summary.vacuous},
  };
}

}  // namespace alphatown
