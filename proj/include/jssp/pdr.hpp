#ifndef JSSP_PDR_HPP
#define JSSP_PDR_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "jssp/env.hpp"
#include "jssp/schedule.hpp"

namespace jssp {

enum class DispatchRule { Spt, Mor, Mwkr };

std::optional<DispatchRule> parse_rule(std::string_view name);
std::string rule_name(DispatchRule rule);

// Legal job chosen by the rule; ties go to the lowest job index.
//   Spt:  shortest processing time of the job's next operation
//   Mor:  most unscheduled operations remaining
//   Mwkr: most remaining processing time
int pdr_action(const DispatchState& state, DispatchRule rule);

struct RolloutResult {
  Schedule schedule;
  std::int64_t makespan = 0;
};

RolloutResult pdr_rollout(const Instance& inst, DispatchRule rule);

}  // namespace jssp

#endif  // JSSP_PDR_HPP
