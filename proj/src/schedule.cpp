#include "jssp/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "jssp/error.hpp"

namespace jssp {

namespace {

std::string op_name(const Instance& inst, int op) {
  return "O(" + std::to_string(inst.job_of(op)) + "," + std::to_string(inst.index_in_job(op)) + ")";
}

}  // namespace

std::int64_t schedule_makespan(const Instance& inst, const std::vector<std::int64_t>& start) {
  std::int64_t out = 0;
  for (int op = 0; op < inst.num_operations(); ++op)
    out = std::max(out, start[op] + inst.proc_time_of(op));
  return out;
}

std::optional<ScheduleViolation> validate_schedule(const Instance& inst, const Schedule& sched) {
  using Kind = ScheduleViolation::Kind;
  const int n = inst.num_operations();
  if (static_cast<int>(sched.start.size()) != n)
    return ScheduleViolation{Kind::Shape, -1, -1,
                             "expected " + std::to_string(n) + " start times, got " +
                                 std::to_string(sched.start.size())};
  for (int op = 0; op < n; ++op)
    if (sched.start[op] < 0)
      return ScheduleViolation{Kind::NegativeStart, op, -1, op_name(inst, op) + " has a negative start"};
  for (int j = 0; j < inst.num_jobs; ++j) {
    for (int k = 1; k < inst.num_machines; ++k) {
      const int prev = inst.op_id(j, k - 1);
      const int op = inst.op_id(j, k);
      if (sched.start[op] < sched.start[prev] + inst.proc_times[j][k - 1])
        return ScheduleViolation{Kind::Precedence, prev, op,
                                 op_name(inst, op) + " starts before " + op_name(inst, prev) + " completes"};
    }
  }
  std::vector<std::vector<int>> on_machine(inst.num_machines);
  for (int op = 0; op < n; ++op) on_machine[inst.machine_of(op)].push_back(op);
  for (auto& ops : on_machine) {
    std::sort(ops.begin(), ops.end(), [&](int a, int b) {
      return sched.start[a] != sched.start[b] ? sched.start[a] < sched.start[b] : a < b;
    });
    for (std::size_t i = 1; i < ops.size(); ++i) {
      const int a = ops[i - 1];
      const int b = ops[i];
      if (sched.start[b] < sched.start[a] + inst.proc_time_of(a))
        return ScheduleViolation{Kind::MachineOverlap, a, b,
                                 op_name(inst, a) + " and " + op_name(inst, b) + " overlap on machine " +
                                     std::to_string(inst.machine_of(a))};
    }
  }
  const auto cmax = schedule_makespan(inst, sched.start);
  if (cmax != sched.makespan)
    return ScheduleViolation{Kind::Makespan, -1, -1,
                             "declared makespan " + std::to_string(sched.makespan) + " but latest completion is " +
                                 std::to_string(cmax)};
  return std::nullopt;
}

Schedule schedule_from_state(const DispatchState& state, ScheduleSource source) {
  if (!state.terminal()) throw StateError("schedule requested for a non-terminal state");
  const auto& inst = state.instance();
  Schedule out;
  out.start.resize(inst.num_operations());
  for (int op = 0; op < inst.num_operations(); ++op) out.start[op] = state.start_time(op);
  out.makespan = makespan(state);
  out.source = source;
  return out;
}

std::vector<int> schedule_to_actions(const Instance& inst, const Schedule& sched) {
  if (auto v = validate_schedule(inst, sched)) throw ValidationError("invalid schedule: " + v->message);
  std::vector<int> ops(inst.num_operations());
  std::iota(ops.begin(), ops.end(), 0);
  std::sort(ops.begin(), ops.end(), [&](int a, int b) {
    if (sched.start[a] != sched.start[b]) return sched.start[a] < sched.start[b];
    if (inst.machine_of(a) != inst.machine_of(b)) return inst.machine_of(a) < inst.machine_of(b);
    return inst.job_of(a) < inst.job_of(b);
  });
  std::vector<int> actions;
  actions.reserve(ops.size());
  for (int op : ops) actions.push_back(inst.job_of(op));
  return actions;
}

DispatchState replay(const Instance& inst, const std::vector<int>& actions) {
  auto state = reset(inst);
  for (int a : actions) apply_step(state, a);
  return state;
}

std::string write_solution(const Instance& inst, const Schedule& sched) {
  std::string out = "solution " + std::to_string(inst.num_jobs) + " " + std::to_string(inst.num_machines) + " " +
                    std::to_string(sched.makespan) + "\n";
  for (int j = 0; j < inst.num_jobs; ++j) {
    for (int k = 0; k < inst.num_machines; ++k) {
      if (k) out += ' ';
      out += std::to_string(sched.start[inst.op_id(j, k)]);
    }
    out += '\n';
  }
  return out;
}

Schedule parse_solution(std::string_view text, const Instance& inst) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool have_header = false;
  Schedule sched;
  sched.source = ScheduleSource::External;
  sched.start.assign(inst.num_operations(), -1);
  int job = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (!have_header) {
      std::string tag;
      long long jobs = 0, machines = 0, cmax = 0;
      if (!(ls >> tag >> jobs >> machines >> cmax) || tag != "solution")
        throw ParseError(where + "expected 'solution num_jobs num_machines makespan'");
      if (jobs != inst.num_jobs || machines != inst.num_machines)
        throw ParseError(where + "solution dimensions do not match the instance");
      sched.makespan = cmax;
      have_header = true;
      continue;
    }
    if (job >= inst.num_jobs) throw ParseError(where + "too many job lines");
    for (int k = 0; k < inst.num_machines; ++k) {
      long long s = 0;
      if (!(ls >> s)) throw ParseError(where + "expected " + std::to_string(inst.num_machines) + " start times");
      sched.start[inst.op_id(job, k)] = s;
    }
    std::string extra;
    if (ls >> extra) throw ParseError(where + "trailing data '" + extra + "'");
    ++job;
  }
  if (!have_header) throw ParseError("line 1: missing solution header");
  if (job != inst.num_jobs) throw ParseError("line " + std::to_string(line_no) + ": missing job lines");
  return sched;
}

ReferenceMap parse_references(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  ReferenceMap refs;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    long long value = 0;
    std::string extra;
    if (!(ls >> name >> value) || (ls >> extra) || value <= 0)
      throw ParseError("line " + std::to_string(line_no) + ": expected 'instance_name reference_makespan'");
    refs[name] = value;
  }
  return refs;
}

std::string write_references(const ReferenceMap& refs) {
  std::string out;
  for (const auto& [name, value] : refs) out += name + " " + std::to_string(value) + "\n";
  return out;
}

}  // namespace jssp
