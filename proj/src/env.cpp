#include "jssp/env.hpp"

#include <algorithm>
#include <string>

#include "jssp/error.hpp"

namespace jssp {

int Observation::num_legal() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

DispatchState::DispatchState(std::shared_ptr<const Instance> inst) : inst_(std::move(inst)) {
  const int n = inst_->num_operations();
  scheduled_.assign(n, 0);
  start_.assign(n, -1);
  clb_.assign(n, 0);
  timelines_.assign(inst_->num_machines, {});
  next_.assign(inst_->num_jobs, 0);
}

DispatchState reset(std::shared_ptr<const Instance> inst) {
  check_instance(*inst);
  DispatchState state(std::move(inst));
  recompute_lower_bounds(state);
  return state;
}

std::vector<int> legal_actions(const DispatchState& state) {
  std::vector<int> out;
  const auto& inst = state.instance();
  for (int j = 0; j < inst.num_jobs; ++j)
    if (state.next_index(j) < inst.num_machines) out.push_back(j);
  return out;
}

bool is_legal(const DispatchState& state, int job) {
  const auto& inst = state.instance();
  return job >= 0 && job < inst.num_jobs && state.next_index(job) < inst.num_machines;
}

std::vector<std::int64_t> compute_clb(const DispatchState& state) {
  const auto& inst = state.instance();
  std::vector<std::int64_t> clb(inst.num_operations());
  for (int j = 0; j < inst.num_jobs; ++j) {
    std::int64_t prev = 0;
    for (int k = 0; k < inst.num_machines; ++k) {
      const int op = inst.op_id(j, k);
      prev = state.is_scheduled(op) ? state.start_time(op) + inst.proc_times[j][k]
                                    : prev + inst.proc_times[j][k];
      clb[op] = prev;
    }
  }
  return clb;
}

void recompute_lower_bounds(DispatchState& state) {
  state.clb_ = compute_clb(state);
  state.max_clb_ = *std::max_element(state.clb_.begin(), state.clb_.end());
}

std::int64_t apply_step(DispatchState& state, int job) {
  if (!is_legal(state, job))
    throw InvalidActionError("job " + std::to_string(job) + " is not a legal action");
  const auto& inst = *state.inst_;
  const int k = state.next_[job];
  const int op = inst.op_id(job, k);
  const int machine = inst.routing[job][k];
  const std::int64_t p = inst.proc_times[job][k];
  const std::int64_t ready = k == 0 ? 0 : state.start_[op - 1] + inst.proc_times[job][k - 1];

  // Earliest gap on the machine that fits [t, t + p) with t >= ready.
  auto& timeline = state.timelines_[machine];
  std::int64_t t = ready;
  auto pos = timeline.begin();
  for (; pos != timeline.end(); ++pos) {
    if (pos->end <= t) continue;
    if (t + p <= pos->start) break;
    t = std::max(t, pos->end);
  }
  timeline.insert(pos, Interval{t, t + p, op});

  state.scheduled_[op] = 1;
  state.start_[op] = t;
  state.next_[job] = k + 1;
  ++state.step_count_;

  const std::int64_t before = state.max_clb_;
  recompute_lower_bounds(state);
  return before - state.max_clb_;
}

std::pair<DispatchState, std::int64_t> step(const DispatchState& state, int job) {
  DispatchState next = state;
  const auto reward = apply_step(next, job);
  return {std::move(next), reward};
}

std::int64_t makespan(const DispatchState& state) {
  if (!state.terminal()) throw StateError("makespan requested for a non-terminal state");
  std::int64_t out = 0;
  const auto& inst = state.instance();
  for (int op = 0; op < inst.num_operations(); ++op)
    out = std::max(out, state.start_time(op) + inst.proc_time_of(op));
  return out;
}

Observation observe(const DispatchState& state, double feature_scale) {
  const auto& inst = state.instance();
  const int n = inst.num_operations();
  Observation obs;
  obs.num_jobs = inst.num_jobs;
  obs.node_features.resize(n, 2);
  for (int op = 0; op < n; ++op) {
    obs.node_features(op, 0) = state.is_scheduled(op) ? 1.0 : 0.0;
    obs.node_features(op, 1) = static_cast<double>(state.lower_bound(op)) / feature_scale;
  }
  obs.conj_edges.reserve(inst.num_jobs * (inst.num_machines - 1));
  for (int j = 0; j < inst.num_jobs; ++j)
    for (int k = 0; k + 1 < inst.num_machines; ++k)
      obs.conj_edges.emplace_back(inst.op_id(j, k), inst.op_id(j, k + 1));
  for (int m = 0; m < inst.num_machines; ++m) {
    const auto& tl = state.machine_timeline(m);
    for (std::size_t i = 1; i < tl.size(); ++i) obs.disj_edges.emplace_back(tl[i - 1].op, tl[i].op);
  }
  obs.mask.resize(inst.num_jobs);
  obs.candidates.resize(inst.num_jobs);
  for (int j = 0; j < inst.num_jobs; ++j) {
    const int k = state.next_index(j);
    obs.mask[j] = k < inst.num_machines ? 1 : 0;
    obs.candidates[j] = inst.op_id(j, std::min(k, inst.num_machines - 1));
  }
  return obs;
}

bool oriented_graph_is_acyclic(const DispatchState& state) {
  const auto& inst = state.instance();
  const int n = inst.num_operations();
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indegree(n, 0);
  auto add = [&](int a, int b) {
    succ[a].push_back(b);
    ++indegree[b];
  };
  for (int j = 0; j < inst.num_jobs; ++j)
    for (int k = 0; k + 1 < inst.num_machines; ++k) add(inst.op_id(j, k), inst.op_id(j, k + 1));
  for (int m = 0; m < inst.num_machines; ++m) {
    const auto& tl = state.machine_timeline(m);
    // Full orientation: every earlier operation precedes every later one.
    for (std::size_t a = 0; a < tl.size(); ++a)
      for (std::size_t b = a + 1; b < tl.size(); ++b) add(tl[a].op, tl[b].op);
  }
  std::vector<int> queue;
  for (int v = 0; v < n; ++v)
    if (indegree[v] == 0) queue.push_back(v);
  std::size_t head = 0;
  while (head < queue.size()) {
    const int v = queue[head++];
    for (int w : succ[v])
      if (--indegree[w] == 0) queue.push_back(w);
  }
  return static_cast<int>(queue.size()) == n;
}

}  // namespace jssp
