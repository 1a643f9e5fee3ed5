#include "jssp/pdr.hpp"

#include "jssp/error.hpp"

namespace jssp {

std::optional<DispatchRule> parse_rule(std::string_view name) {
  if (name == "spt" || name == "SPT") return DispatchRule::Spt;
  if (name == "mor" || name == "MOR") return DispatchRule::Mor;
  if (name == "mwkr" || name == "MWKR") return DispatchRule::Mwkr;
  return std::nullopt;
}

std::string rule_name(DispatchRule rule) {
  switch (rule) {
    case DispatchRule::Spt: return "spt";
    case DispatchRule::Mor: return "mor";
    case DispatchRule::Mwkr: return "mwkr";
  }
  return "unknown";
}

int pdr_action(const DispatchState& state, DispatchRule rule) {
  if (state.terminal()) throw StateError("pdr_action on a terminal state");
  const auto& inst = state.instance();
  int best = -1;
  std::int64_t best_key = 0;
  for (int j = 0; j < inst.num_jobs; ++j) {
    const int k = state.next_index(j);
    if (k >= inst.num_machines) continue;
    std::int64_t key = 0;  // larger is better
    switch (rule) {
      case DispatchRule::Spt:
        key = -inst.proc_times[j][k];
        break;
      case DispatchRule::Mor:
        key = inst.num_machines - k;
        break;
      case DispatchRule::Mwkr:
        for (int r = k; r < inst.num_machines; ++r) key += inst.proc_times[j][r];
        break;
    }
    if (best < 0 || key > best_key) {
      best = j;
      best_key = key;
    }
  }
  return best;
}

RolloutResult pdr_rollout(const Instance& inst, DispatchRule rule) {
  auto state = reset(inst);
  while (!state.terminal()) apply_step(state, pdr_action(state, rule));
  RolloutResult out;
  out.schedule = schedule_from_state(state, ScheduleSource::Rollout);
  out.makespan = out.schedule.makespan;
  return out;
}

}  // namespace jssp
