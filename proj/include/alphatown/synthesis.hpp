#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alphatown/constructions.hpp"
#include "alphatown/family.hpp"
#include "alphatown/pattern.hpp"

namespace alphatown {

enum class PlanStrategy {
  kConstant,           // all entries equal: zero block plus shifts
  kLastChange,         // a_t != a_{t+1} = ... = a_k with k >= 2t
  kPeriodicSpan,       // in the eps/dot-eps span at some level
  kUnitDecomposition,  // sum of a_i * eps_i
};

[[nodiscard]] const char* to_string(PlanStrategy strategy);

struct PlanNode {
  enum class Type { kBlock, kZero, kShift, kConcat };

  Type type = Type::kBlock;
  /// Ground elements this subtree may use.
  std::uint64_t ground = 0;
  std::uint64_t predicted_size = 0;
  /// Human-readable role, e.g. "eps_2" or "dot_eps_1,4".
  std::string role;

  BlockParams block;                 // kBlock
  std::uint64_t member_limit = 0;    // kZero
  std::uint64_t shift_count = 0;     // kShift
  std::vector<PlanNode> children;    // kShift (one), kConcat
};

struct BlockPlan {
  Pattern pattern;  // as requested, stars included
  Pattern planned;  // stars replaced by 1
  std::uint64_t n = 0;
  PlanStrategy strategy = PlanStrategy::kConstant;
  /// Last-change position (kLastChange) or last nonzero position (kUnitDecomposition).
  std::optional<std::size_t> t;
  /// Span level (kPeriodicSpan).
  std::optional<std::size_t> level;
  /// Shifts applied on top (kConstant, kLastChange).
  std::uint64_t shifts = 0;
  /// Auxiliary ground per auxiliary block and their count (kLastChange).
  std::uint64_t aux_ground = 0;
  std::uint64_t aux_count = 0;
  PlanNode root;

  [[nodiscard]] std::uint64_t predicted_size() const noexcept { return root.predicted_size; }
};

struct SynthesisOptions {
  std::uint64_t member_limit = kDefaultMemberLimit;
  std::uint64_t verify_budget = kDefaultNodeBudget;
};

/// Compiles a pattern into a block plan over ground budget n. Strategies are
/// tried in the order of PlanStrategy; the first that applies wins.
[[nodiscard]] BlockPlan plan_for_pattern(const Pattern& pattern, std::uint64_t n,
                                         const SynthesisOptions& options = {});

/// Instantiates the plan's leaves, applies shifts, concatenates children and
/// pads the result to the plan's ground budget.
[[nodiscard]] SetFamily execute_plan(const BlockPlan& plan);

struct Certificate {
  Pattern pattern;
  std::uint64_t n = 0;
  SetFamily family;
  BlockPlan plan;
  bool verified = false;
  std::size_t checked_depth = 0;
  VerificationOutcome outcome;
  std::string target_formula;
  std::optional<double> target_value;

  [[nodiscard]] std::size_t size() const noexcept { return family.size(); }
  [[nodiscard]] std::optional<double> ratio() const;
};

/// plan -> execute -> verify against the original pattern (stars included).
/// A failed verification is an internal error; an exhausted verification
/// budget yields verified = false.
[[nodiscard]] Certificate synthesize(const Pattern& pattern, std::uint64_t n, std::size_t verify_depth,
                                     const SynthesisOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const PlanNode& node);
[[nodiscard]] nlohmann::json to_json(const BlockPlan& plan);
[[nodiscard]] nlohmann::json to_json(const Certificate& certificate);

}  // namespace alphatown
