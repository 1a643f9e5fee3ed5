#include "jssp/exact.hpp"

#include <algorithm>
#include <limits>

#include "jssp/error.hpp"
#include "jssp/pdr.hpp"

namespace jssp {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

class BranchAndBound {
 public:
  BranchAndBound(const Instance& inst, std::int64_t budget)
      : inst_(inst),
        budget_(budget),
        next_(inst.num_jobs, 0),
        job_ready_(inst.num_jobs, 0),
        job_work_(inst.num_jobs, 0),
        mach_ready_(inst.num_machines, 0),
        mach_load_(inst.num_machines, 0),
        start_(inst.num_operations(), -1),
        head_(inst.num_machines),
        tail_(inst.num_machines) {
    for (int j = 0; j < inst.num_jobs; ++j)
      for (int k = 0; k < inst.num_machines; ++k) {
        job_work_[j] += inst.proc_times[j][k];
        mach_load_[inst.routing[j][k]] += inst.proc_times[j][k];
      }
  }

  void set_incumbent(const Schedule& s) {
    best_ = s.makespan;
    best_start_ = s.start;
  }

  void run() { search(0, 0); }

  bool aborted() const { return aborted_; }
  std::int64_t nodes() const { return nodes_; }
  std::int64_t best() const { return best_; }
  const std::vector<std::int64_t>& best_start() const { return best_start_; }

 private:
  std::int64_t lower_bound(std::int64_t current) {
    std::int64_t lb = current;
    std::fill(head_.begin(), head_.end(), kInf);
    std::fill(tail_.begin(), tail_.end(), kInf);
    for (int j = 0; j < inst_.num_jobs; ++j) {
      if (next_[j] >= inst_.num_machines) continue;
      lb = std::max(lb, job_ready_[j] + job_work_[j]);
      std::int64_t head = job_ready_[j];
      std::int64_t tail = job_work_[j];
      for (int k = next_[j]; k < inst_.num_machines; ++k) {
        const int m = inst_.routing[j][k];
        const std::int64_t p = inst_.proc_times[j][k];
        tail -= p;
        head_[m] = std::min(head_[m], head);
        tail_[m] = std::min(tail_[m], tail);
        head += p;
      }
    }
    for (int m = 0; m < inst_.num_machines; ++m) {
      if (mach_load_[m] == 0) continue;
      lb = std::max(lb, std::max(mach_ready_[m], head_[m]) + mach_load_[m] + tail_[m]);
    }
    return lb;
  }

  void search(int depth, std::int64_t current) {
    if (aborted_) return;
    if (++nodes_ > budget_) {
      aborted_ = true;
      return;
    }
    if (depth == inst_.num_operations()) {
      if (current < best_) {
        best_ = current;
        best_start_ = start_;
      }
      return;
    }
    if (lower_bound(current) >= best_) return;

    // Operation with the earliest possible completion fixes the machine.
    int pivot_machine = -1;
    std::int64_t pivot_ect = kInf;
    for (int j = 0; j < inst_.num_jobs; ++j) {
      const int k = next_[j];
      if (k >= inst_.num_machines) continue;
      const int m = inst_.routing[j][k];
      const std::int64_t ect = std::max(job_ready_[j], mach_ready_[m]) + inst_.proc_times[j][k];
      if (ect < pivot_ect || (ect == pivot_ect && m < pivot_machine)) {
        pivot_ect = ect;
        pivot_machine = m;
      }
    }
    struct Child {
      std::int64_t est;
      int p;
      int job;
    };
    Child children[64];
    int count = 0;
    for (int j = 0; j < inst_.num_jobs; ++j) {
      const int k = next_[j];
      if (k >= inst_.num_machines || inst_.routing[j][k] != pivot_machine) continue;
      const std::int64_t est = std::max(job_ready_[j], mach_ready_[pivot_machine]);
      if (est < pivot_ect) children[count++] = {est, inst_.proc_times[j][k], j};
    }
    std::sort(children, children + count, [](const Child& a, const Child& b) {
      if (a.est != b.est) return a.est < b.est;
      if (a.p != b.p) return a.p < b.p;
      return a.job < b.job;
    });
    for (int c = 0; c < count && !aborted_; ++c) {
      const int j = children[c].job;
      const int k = next_[j];
      const int op = inst_.op_id(j, k);
      const std::int64_t p = children[c].p;
      const std::int64_t est = children[c].est;
      const std::int64_t saved_job = job_ready_[j];
      const std::int64_t saved_mach = mach_ready_[pivot_machine];
      start_[op] = est;
      job_ready_[j] = mach_ready_[pivot_machine] = est + p;
      job_work_[j] -= p;
      mach_load_[pivot_machine] -= p;
      ++next_[j];
      search(depth + 1, std::max(current, est + p));
      --next_[j];
      mach_load_[pivot_machine] += p;
      job_work_[j] += p;
      job_ready_[j] = saved_job;
      mach_ready_[pivot_machine] = saved_mach;
      start_[op] = -1;
    }
  }

  const Instance& inst_;
  std::int64_t budget_;
  std::vector<int> next_;
  std::vector<std::int64_t> job_ready_, job_work_, mach_ready_, mach_load_, start_;
  std::vector<std::int64_t> head_, tail_;
  std::int64_t best_ = kInf;
  std::vector<std::int64_t> best_start_;
  std::int64_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace

ExactResult solve_exact(const Instance& inst, std::int64_t node_budget) {
  check_instance(inst);
  if (inst.num_jobs > 64) throw DimensionError("solve_exact supports at most 64 jobs");
  BranchAndBound bnb(inst, node_budget);
  Schedule incumbent;
  for (auto rule : {DispatchRule::Mor, DispatchRule::Mwkr, DispatchRule::Spt}) {
    auto r = pdr_rollout(inst, rule);
    if (incumbent.start.empty() || r.makespan < incumbent.makespan) incumbent = std::move(r.schedule);
  }
  bnb.set_incumbent(incumbent);
  bnb.run();

  ExactResult out;
  out.schedule.start = bnb.best_start();
  out.schedule.makespan = bnb.best();
  out.schedule.source = ScheduleSource::Oracle;
  out.optimal = !bnb.aborted();
  out.nodes = bnb.nodes();
  return out;
}

}  // namespace jssp
