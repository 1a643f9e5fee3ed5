#ifndef JSSP_SCHEDULE_HPP
#define JSSP_SCHEDULE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jssp/env.hpp"
#include "jssp/instance.hpp"

namespace jssp {

enum class ScheduleSource { Oracle, External, Rollout };

// Complete assignment of start times, indexed by flat operation id.
struct Schedule {
  std::vector<std::int64_t> start;
  std::int64_t makespan = 0;
  ScheduleSource source = ScheduleSource::External;
};

struct ScheduleViolation {
  enum class Kind { Shape, NegativeStart, Precedence, MachineOverlap, Makespan };
  Kind kind;
  int op_a = -1;
  int op_b = -1;
  std::string message;
};

// Empty optional when the schedule is feasible and its makespan field matches
// the latest completion; otherwise the first violation found.
std::optional<ScheduleViolation> validate_schedule(const Instance& inst, const Schedule& sched);

std::int64_t schedule_makespan(const Instance& inst, const std::vector<std::int64_t>& start);

// Schedule induced by a terminal dispatch state.
Schedule schedule_from_state(const DispatchState& state, ScheduleSource source);

// Dispatch order: operations sorted by (start, machine, job). Replaying it
// never increases any start time, so the makespan is preserved for
// semi-active schedules. Throws ValidationError for infeasible input.
std::vector<int> schedule_to_actions(const Instance& inst, const Schedule& sched);

// Runs the action sequence from reset; throws InvalidActionError on the first
// illegal action.
DispatchState replay(const Instance& inst, const std::vector<int>& actions);

// "solution J M makespan" header, then one line per job holding the start
// times of its operations in routing order.
std::string write_solution(const Instance& inst, const Schedule& sched);
Schedule parse_solution(std::string_view text, const Instance& inst);

// Reference makespans: lines "instance_name reference_makespan".
using ReferenceMap = std::map<std::string, std::int64_t>;
ReferenceMap parse_references(std::string_view text);
std::string write_references(const ReferenceMap& refs);

}  // namespace jssp

#endif  // JSSP_SCHEDULE_HPP
