#include "alphatown/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alphatown/arith.hpp"
#include "alphatown/error.hpp"

namespace alphatown {

namespace {

PlanNode block_leaf(std::uint64_t s, std::uint64_t p, std::uint64_t ground) {
  PlanNode node;
  node.type = PlanNode::Type::kBlock;
  node.ground = ground;
  node.block = {BlockKind::kBlock, s, (s - 1) % block_class_modulus(s, p), p, ground};
  node.predicted_size = block_member_count(node.block);
  node.role = "eps_" + std::to_string(s);
  return node;
}

// Co-block of subset size period - 1 realizing dot_eps_{start, period}.
PlanNode coblock_leaf(std::uint64_t start, std::uint64_t period, std::uint64_t p, std::uint64_t ground) {
  PlanNode node;
  node.type = PlanNode::Type::kBlock;
  node.ground = ground;
  node.block = {BlockKind::kCoblock, period - 1, start - 1, p, ground};
  node.predicted_size = block_member_count(node.block);
  node.role = "dot_eps_" + std::to_string(start) + "," + std::to_string(period);
  return node;
}

PlanNode zero_leaf(std::uint64_t p, std::uint64_t ground, std::uint64_t member_limit) {
  PlanNode node;
  node.type = PlanNode::Type::kZero;
  node.ground = ground;
  node.member_limit = member_limit;
  node.predicted_size = zero_block_size(p, ground, member_limit);
  node.role = "zero";
  return node;
}

PlanNode concat_node(std::vector<PlanNode> children) {
  if (children.size() == 1) return std::move(children.front());
  PlanNode node;
  node.type = PlanNode::Type::kConcat;
  node.role = "concat";
  node.predicted_size = children.front().predicted_size;
  for (const auto& child : children) {
    node.ground += child.ground;
    node.predicted_size = std::min(node.predicted_size, child.predicted_size);
  }
  node.children = std::move(children);
  return node;
}

PlanNode shift_node(PlanNode child, std::uint64_t count) {
  if (count == 0) return child;
  PlanNode node;
  node.type = PlanNode::Type::kShift;
  node.role = "shift";
  node.shift_count = count;
  node.ground = child.ground + count;
  node.predicted_size = child.predicted_size;
  node.children.push_back(std::move(child));
  return node;
}

[[noreturn]] void too_small(const std::string& what) { throw Error(ErrorKind::kGroundTooSmall, what); }

// Equal split of n among leaves described by (kind, parameters).
struct LeafSpec {
  bool coblock = false;
  std::uint64_t a = 0;  // s for blocks, start for co-blocks
  std::uint64_t period = 0;
};

PlanNode equal_split(const std::vector<LeafSpec>& specs, std::uint64_t p, std::uint64_t n) {
  const std::uint64_t share = n / specs.size();
  if (share == 0) too_small("ground " + std::to_string(n) + " cannot be split among " + std::to_string(specs.size()) + " blocks");
  std::vector<PlanNode> leaves;
  for (const auto& spec : specs) {
    leaves.push_back(spec.coblock ? coblock_leaf(spec.a, spec.period, p, share) : block_leaf(spec.a, p, share));
  }
  return concat_node(std::move(leaves));
}

bool plan_constant(BlockPlan& plan, const SynthesisOptions& options) {
  const auto& alpha = plan.planned;
  if (!alpha.is_constant()) return false;
  const auto p = alpha.modulus();
  const auto c = alpha.residue(1);
  if (plan.n < c + p) too_small("constant pattern needs n >= p + shifts");
  plan.strategy = PlanStrategy::kConstant;
  plan.shifts = c;
  plan.root = shift_node(zero_leaf(p, plan.n - c, options.member_limit), c);
  return true;
}

bool plan_last_change(BlockPlan& plan) {
  const auto& alpha = plan.planned;
  const auto p = alpha.modulus();
  const auto k = alpha.length();
  const auto tail = alpha.residue(k);
  std::size_t t = 0;
  for (std::size_t j = k; j >= 1; --j) {
    if (alpha.residue(j) != tail) {
      t = j;
      break;
    }
  }
  if (t == 0 || k < 2 * t) return false;

  // Plan for alpha - tail * 1 (zero tail) and add the tail back by shifting.
  std::vector<std::uint64_t> coefficient(t + 1, 0);
  for (std::size_t j = 1; j <= t; ++j) coefficient[j] = (alpha.residue(j) + p - tail) % p;
  std::uint64_t aux_count = 0;
  for (std::size_t j = 1; j < t; ++j) aux_count += coefficient[j];

  plan.strategy = PlanStrategy::kLastChange;
  plan.t = t;
  plan.shifts = tail;
  plan.aux_count = aux_count;
  // Auxiliary ground n^((2t-1)/(2t)): the substitution split with exponents 1/(t-1) and 1/t.
  plan.aux_ground = aux_count > 0 ? ceil_rational_power(plan.n, 2 * t - 1, 2 * t) : 0;
  const std::uint64_t reserved = tail + aux_count * plan.aux_ground;
  if (reserved >= plan.n) {
    too_small("n=" + std::to_string(plan.n) + " leaves no ground for the main block after " +
              std::to_string(reserved) + " reserved elements");
  }
  const std::uint64_t main_ground = plan.n - reserved;
  const std::uint64_t copies = coefficient[t];
  const std::uint64_t share = main_ground / copies;
  if (share == 0) too_small("main block ground split is empty");

  std::vector<PlanNode> children;
  for (std::uint64_t c = 0; c < copies; ++c) {
    auto leaf = block_leaf(t, p, share);
    leaf.role = "main:" + leaf.role;
    children.push_back(std::move(leaf));
  }
  for (std::size_t j = 1; j < t; ++j) {
    for (std::uint64_t c = 0; c < coefficient[j]; ++c) {
      auto leaf = block_leaf(j, p, plan.aux_ground);
      leaf.role = "aux:" + leaf.role;
      children.push_back(std::move(leaf));
    }
  }
  plan.root = shift_node(concat_node(std::move(children)), tail);
  return true;
}

bool plan_periodic_span(BlockPlan& plan) {
  const auto& alpha = plan.planned;
  const auto p = alpha.modulus();
  const auto k = alpha.length();
  std::size_t last = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    if (alpha.residue(j) != 0) last = j;
  }
  // Smallest level first: it carries the largest guaranteed exponent
  // 1/(p^l - 1). Once that is no better than the unit decomposition's
  // 1/last, stop.
  for (std::size_t level = 1;; ++level) {
    const auto period = checked_pow(p, level);
    if (period > k || period - 1 >= last) return false;
    const auto basis = theorem_basis(k, level, p, BasisKind::kSpan);
    const auto decomposition = decompose_in_span(alpha, basis);
    if (!decomposition) continue;
    std::vector<LeafSpec> specs;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      for (std::uint64_t c = 0; c < decomposition->coefficients[b]; ++c) {
        if (b + 1 < period) {
          specs.push_back({false, b + 1, 0});
        } else {
          specs.push_back({true, b + 2 - period, period});
        }
      }
    }
    plan.strategy = PlanStrategy::kPeriodicSpan;
    plan.level = level;
    plan.root = equal_split(specs, p, plan.n);
    return true;
  }
}

void plan_unit_decomposition(BlockPlan& plan) {
  const auto& alpha = plan.planned;
  std::vector<LeafSpec> specs;
  std::size_t last = 0;
  for (std::size_t j = 1; j <= alpha.length(); ++j) {
    for (std::uint64_t c = 0; c < alpha.residue(j); ++c) specs.push_back({false, j, 0});
    if (alpha.residue(j) != 0) last = j;
  }
  plan.strategy = PlanStrategy::kUnitDecomposition;
  plan.t = last;
  plan.root = equal_split(specs, alpha.modulus(), plan.n);
}

SetFamily execute_node(const PlanNode& node, std::uint64_t p) {
  switch (node.type) {
    case PlanNode::Type::kBlock:
      return make_block(node.block);
    case PlanNode::Type::kZero:
      return zero_block(p, node.ground, node.member_limit);
    case PlanNode::Type::kShift: {
      auto family = execute_node(node.children.front(), p);
      for (std::uint64_t c = 0; c < node.shift_count; ++c) family = shift_lift(family);
      return family;
    }
    case PlanNode::Type::kConcat: {
      auto family = execute_node(node.children.front(), p);
      for (std::size_t j = 1; j < node.children.size(); ++j) {
        family = concatenate(family, execute_node(node.children[j], p));
      }
      return family;
    }
  }
  throw Error(ErrorKind::kInternal, "unknown plan node");
}

std::string rational_power_formula(const std::string& base, std::uint64_t den) {
  return den == 1 ? base : base + "^(1/" + std::to_string(den) + ")";
}

}  // namespace

const char* to_string(PlanStrategy strategy) {
  switch (strategy) {
    case PlanStrategy::kConstant:
      return "constant";
    case PlanStrategy::kLastChange:
      return "last-change";
    case PlanStrategy::kPeriodicSpan:
      return "periodic-span";
    case PlanStrategy::kUnitDecomposition:
      return "unit-decomposition";
  }
  return "unknown";
}

BlockPlan plan_for_pattern(const Pattern& pattern, std::uint64_t n, const SynthesisOptions& options) {
  if (n < 1) throw_invalid("ground budget must be positive");
  BlockPlan plan{pattern, pattern.with_stars_as(1), n, PlanStrategy::kConstant, {}, {}, 0, 0, 0, {}};
  if (plan_constant(plan, options)) return plan;
  if (plan_last_change(plan)) return plan;
  if (plan_periodic_span(plan)) return plan;
  plan_unit_decomposition(plan);
  return plan;
}

SetFamily execute_plan(const BlockPlan& plan) {
  auto family = execute_node(plan.root, plan.planned.modulus());
  if (family.ground_size() > plan.n) {
    throw Error(ErrorKind::kInternal, "plan used more ground than its budget");
  }
  return family.ground_size() == plan.n ? family : family.with_ground_size(plan.n);
}

std::optional<double> Certificate::ratio() const {
  if (!target_value || *target_value <= 0.0) return std::nullopt;
  return static_cast<double>(family.size()) / *target_value;
}

Certificate synthesize(const Pattern& pattern, std::uint64_t n, std::size_t verify_depth,
                       const SynthesisOptions& options) {
  if (verify_depth < 1) throw_invalid("verification depth must be at least 1");
  auto plan = plan_for_pattern(pattern, n, options);
  auto family = execute_plan(plan);
  auto outcome = verify_pattern(family, pattern, verify_depth, options.verify_budget);
  if (outcome.verdict == Verdict::kFail) {
    const auto& v = *outcome.violation;
    throw Error(ErrorKind::kInternal, "synthesized family violates " + pattern.to_string() + " at level " +
                                          std::to_string(v.level) + " (size " + std::to_string(v.size) + ")");
  }

  const auto p = pattern.modulus();
  const auto dn = static_cast<double>(n);
  std::string formula;
  std::optional<double> target;
  switch (plan.strategy) {
    case PlanStrategy::kConstant: {
      formula = "2^floor(n/" + std::to_string(p) + ")";
      const double exponent = std::floor(dn / static_cast<double>(p));
      if (exponent < 1000.0) target = std::pow(2.0, exponent);
      break;
    }
    case PlanStrategy::kLastChange: {
      const auto t = *plan.t;
      formula = rational_power_formula("(" + std::to_string(t) + "! n)", t);
      target = std::pow(std::tgamma(static_cast<double>(t) + 1.0) * dn, 1.0 / static_cast<double>(t));
      break;
    }
    case PlanStrategy::kPeriodicSpan: {
      const auto den = checked_pow(p, *plan.level) - 1;
      formula = rational_power_formula("n", den);
      target = std::pow(dn, 1.0 / static_cast<double>(den));
      break;
    }
    case PlanStrategy::kUnitDecomposition: {
      const auto t = *plan.t;
      formula = rational_power_formula("n", t);
      target = std::pow(dn, 1.0 / static_cast<double>(t));
      break;
    }
  }

  Certificate certificate{pattern, n, std::move(family), std::move(plan), false, 0, {}, {}, {}};
  certificate.verified = outcome.verdict == Verdict::kPass;
  certificate.checked_depth = outcome.checked_depth;
  certificate.outcome = std::move(outcome);
  certificate.target_formula = std::move(formula);
  certificate.target_value = target;
  return certificate;
}

nlohmann::json to_json(const PlanNode& node) {
  nlohmann::json out = {{"ground", node.ground}, {"predicted_size", node.predicted_size}, {"role", node.role}};
  switch (node.type) {
    case PlanNode::Type::kBlock:
      out["node"] = "leaf";
      out["block"] = to_json(node.block);
      break;
    case PlanNode::Type::kZero:
      out["node"] = "zero";
      out["member_limit"] = node.member_limit;
      break;
    case PlanNode::Type::kShift:
      out["node"] = "shift";
      out["count"] = node.shift_count;
      out["child"] = to_json(node.children.front());
      break;
    case PlanNode::Type::kConcat: {
      out["node"] = "concat";
      nlohmann::json children = nlohmann::json::array();
      for (const auto& child : node.children) children.push_back(to_json(child));
      out["children"] = std::move(children);
      break;
    }
  }
  return out;
}

nlohmann::json to_json(const BlockPlan& plan) {
  nlohmann::json out = {
      {"pattern", plan.pattern.to_string()},
      {"planned_pattern", plan.planned.to_string()},
      {"modulus", plan.planned.modulus()},
      {"n", plan.n},
      {"strategy", to_string(plan.strategy)},
      {"shifts", plan.shifts},
      {"predicted_size", plan.predicted_size()},
      {"tree", to_json(plan.root)},
  };
  if (plan.t) out["t"] = *plan.t;
  if (plan.level) out["level"] = *plan.level;
  if (plan.strategy == PlanStrategy::kLastChange) {
    out["aux_ground"] = plan.aux_ground;
    out["aux_count"] = plan.aux_count;
    if (*plan.t > 1) {
      out["aux_exponent"] = "1/" + std::to_string(*plan.t - 1);
      out["main_exponent"] = "1/" + std::to_string(*plan.t);
    }
  }
  return out;
}

nlohmann::json to_json(const Certificate& certificate) {
  const auto ratio = certificate.ratio();
  return {
      {"pattern", certificate.pattern.to_string()},
      {"modulus", certificate.pattern.modulus()},
      {"n", certificate.n},
      {"size", certificate.size()},
      {"checked_depth", certificate.checked_depth},
      {"verified", certificate.verified},
      {"verification", to_json(certificate.outcome)},
      {"target_formula", certificate.target_formula},
      {"target_value", certificate.target_value ? nlohmann::json(*certificate.target_value) : nlohmann::json()},
      {"ratio", ratio ? nlohmann::json(*ratio) : nlohmann::json()},
      {"family", family_to_json(certificate.family)},
      {"plan", to_json(certificate.plan)},
  };
}

}  // namespace alphatown
