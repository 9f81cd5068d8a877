#include "alphatown/search.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <mutex>
#include <thread>

#include "alphatown/arith.hpp"
#include "alphatown/error.hpp"

namespace alphatown {

namespace {

using Mask = std::uint64_t;

// Orders (size, first-member index) so that larger is better: bigger size,
// then smaller root. Lets workers share one monotone bound.
std::uint64_t make_key(std::uint64_t size, std::size_t root) {
  return (size << 32U) | (0xFFFFFFFFULL - static_cast<std::uint64_t>(root));
}

struct Shared {
  std::atomic<std::uint64_t> best_key{0};
  std::atomic<std::uint64_t> nodes{0};
  std::atomic<bool> out_of_budget{false};
  std::uint64_t budget = 0;

  void publish(std::uint64_t key) {
    auto current = best_key.load();
    while (key > current && !best_key.compare_exchange_weak(current, key)) {
    }
  }
};

class Worker {
 public:
  Worker(const Pattern& pattern, const std::vector<Mask>& candidates, std::optional<std::uint64_t> cap,
         Shared& shared)
      : pattern_(pattern), candidates_(candidates), cap_(cap), shared_(shared),
        levels_(pattern.length()) {}

  void run_root(std::size_t root) {
    root_ = root;
    const auto bound = bounded(1 + (candidates_.size() - root - 1));
    if (pruned(bound)) return;
    std::vector<Mask> rest(candidates_.begin() + static_cast<std::ptrdiff_t>(root) + 1, candidates_.end());
    descend_with(candidates_[root], rest);
  }

  [[nodiscard]] std::uint64_t best_key() const noexcept { return best_key_; }
  [[nodiscard]] const std::vector<Mask>& best_family() const noexcept { return best_family_; }

 private:
  std::uint64_t bounded(std::uint64_t bound) const { return cap_ ? std::min(bound, *cap_) : bound; }

  bool pruned(std::uint64_t bound) const { return shared_.best_key.load() >= make_key(bound, root_); }

  // levels_[j] holds intersections of j-subsets of the family (j < k).
  void add_member(Mask c, std::vector<std::size_t>& marks) {
    const std::size_t k = pattern_.length();
    marks.assign(k, 0);
    for (std::size_t j = 1; j < k; ++j) marks[j] = levels_[j].size();
    const std::size_t top = std::min(k - 1, family_.size());
    for (std::size_t j = top; j >= 1; --j) {
      if (j + 1 >= k) continue;
      for (std::size_t e = 0; e < marks[j]; ++e) levels_[j + 1].push_back(levels_[j][e] & c);
    }
    if (k > 1) levels_[1].push_back(c);
    family_.push_back(c);
  }

  void remove_member(const std::vector<std::size_t>& marks) {
    for (std::size_t j = 1; j < pattern_.length(); ++j) levels_[j].resize(marks[j]);
    family_.pop_back();
  }

  // x joins the family that just gained a member iff every intersection
  // involving the new member (recorded past the marks) extends correctly.
  bool compatible(Mask x, const std::vector<std::size_t>& marks) const {
    for (std::size_t j = 1; j < pattern_.length(); ++j) {
      for (std::size_t e = marks[j]; e < levels_[j].size(); ++e) {
        if (!pattern_.accepts(j + 1, static_cast<std::uint64_t>(std::popcount(levels_[j][e] & x)))) return false;
      }
    }
    return true;
  }

  void descend_with(Mask c, const std::vector<Mask>& pool) {
    std::vector<std::size_t> marks;
    add_member(c, marks);
    std::vector<Mask> next;
    next.reserve(pool.size());
    for (auto x : pool) {
      if (compatible(x, marks)) next.push_back(x);
    }
    descend(next);
    remove_member(marks);
  }

  void descend(const std::vector<Mask>& pool) {
    if (shared_.out_of_budget.load(std::memory_order_relaxed)) return;
    if (shared_.nodes.fetch_add(1, std::memory_order_relaxed) + 1 > shared_.budget) {
      shared_.out_of_budget.store(true);
      return;
    }
    const auto key = make_key(family_.size(), root_);
    if (key > best_key_) {
      best_key_ = key;
      best_family_ = family_;
      shared_.publish(key);
    }
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (pruned(bounded(family_.size() + (pool.size() - j)))) return;
      std::vector<Mask> rest(pool.begin() + static_cast<std::ptrdiff_t>(j) + 1, pool.end());
      descend_with(pool[j], rest);
      if (shared_.out_of_budget.load(std::memory_order_relaxed)) return;
    }
  }

  const Pattern& pattern_;
  const std::vector<Mask>& candidates_;
  std::optional<std::uint64_t> cap_;
  Shared& shared_;
  std::size_t root_ = 0;

  std::vector<std::vector<Mask>> levels_;
  std::vector<Mask> family_;
  std::uint64_t best_key_ = 0;
  std::vector<Mask> best_family_;
};

std::optional<std::uint64_t> counting_cap(const Pattern& pattern, std::uint64_t n) {
  if (pattern.modulus() != 2) return std::nullopt;
  const auto k = pattern.length();
  std::size_t t = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    if (pattern.residue(j) != 0) t = j;
  }
  if (t == 0 || k < 2 * t) return std::nullopt;
  // Largest f with C(f, t) <= n; C(f, t) grows with f once f >= t.
  std::uint64_t f = t;
  while (binomial_capped(f + 1, t, n) <= n) ++f;
  return f;
}

}  // namespace

SearchResult exact_max_family(const Pattern& pattern, std::uint64_t n, const SearchOptions& options) {
  if (n < 1 || n > kMaxSearchGround) {
    throw_invalid("search ground size must lie in [1, " + std::to_string(kMaxSearchGround) + "]");
  }
  std::vector<Mask> candidates;
  for (Mask mask = 0; mask < (Mask{1} << n); ++mask) {
    if (pattern.accepts(1, static_cast<std::uint64_t>(std::popcount(mask)))) candidates.push_back(mask);
  }
  const auto cap = pattern.has_star() ? std::nullopt : counting_cap(pattern, n);

  Shared shared;
  shared.budget = options.node_budget;
  const unsigned jobs = std::max(1U, options.jobs);
  std::vector<Worker> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) workers.emplace_back(pattern, candidates, cap, shared);

  if (jobs == 1) {
    for (std::size_t root = 0; root < candidates.size() && !shared.out_of_budget.load(); ++root) {
      workers.front().run_root(root);
    }
  } else {
    std::atomic<std::size_t> next_root{0};
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < jobs; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t root = next_root++; root < candidates.size() && !shared.out_of_budget.load();
             root = next_root++) {
          workers[w].run_root(root);
        }
      });
    }
    for (auto& thread : threads) thread.join();
  }

  const Worker* winner = &workers.front();
  for (const auto& worker : workers) {
    if (worker.best_key() > winner->best_key()) winner = &worker;
  }
  std::vector<Member> members;
  for (auto mask : winner->best_family()) {
    Member member;
    for (std::uint32_t b = 0; b < n; ++b) {
      if ((mask >> b) & 1U) member.push_back(b + 1);
    }
    members.push_back(std::move(member));
  }
  const auto value = members.size();
  return SearchResult{value, SetFamily(n, pattern.modulus(), std::move(members)),
                      shared.out_of_budget.load() ? SearchStatus::kBudgetExhausted : SearchStatus::kExhausted,
                      std::min(shared.nodes.load(), shared.budget), cap};
}

nlohmann::json to_json(const SearchResult& result, const Pattern& pattern, std::uint64_t n) {
  nlohmann::json out = {
      {"pattern", pattern.to_string()},
      {"modulus", pattern.modulus()},
      {"n", n},
      {"value", result.value},
      {"status", result.status == SearchStatus::kExhausted ? "exhausted" : "budget-exhausted"},
      {"nodes_explored", result.nodes_explored},
      {"witness", family_to_json(result.witness)},
      {"witness_within_pattern_length", result.within_pattern_length(pattern.length())},
  };
  out["counting_cap"] = result.counting_cap ? nlohmann::json(*result.counting_cap) : nlohmann::json();
  return out;
}

}  // namespace alphatown
