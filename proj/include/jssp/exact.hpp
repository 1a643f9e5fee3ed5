#ifndef JSSP_EXACT_HPP
#define JSSP_EXACT_HPP

#include <cstdint>

#include "jssp/instance.hpp"
#include "jssp/schedule.hpp"

namespace jssp {

struct ExactResult {
  Schedule schedule;
  bool optimal = false;  // false when the node budget ran out first
  std::int64_t nodes = 0;
};

inline constexpr std::int64_t kDefaultNodeBudget = 20'000'000;

// Depth-first branch and bound over dispatch decisions, restricted to the
// Giffler-Thompson conflict set so that only active schedules are explored.
// Pruning uses max(job remaining work, machine head + remaining load + minimum
// tail) against the incumbent, which starts from the best dispatching rule.
// Intended for instances with at most ~49 operations.
ExactResult solve_exact(const Instance& inst, std::int64_t node_budget = kDefaultNodeBudget);

}  // namespace jssp

#endif  // JSSP_EXACT_HPP
