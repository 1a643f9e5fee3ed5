#ifndef JSSP_ENV_HPP
#define JSSP_ENV_HPP

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "jssp/instance.hpp"

namespace jssp {

using Edge = std::pair<int, int>;  // (from, to) operation ids

struct Interval {
  std::int64_t start;
  std::int64_t end;
  int op;
};

// Partial schedule built by dispatching one operation at a time. Value type:
// copies are independent and share only the immutable instance.
class DispatchState {
 public:
  explicit DispatchState(std::shared_ptr<const Instance> inst);

  const Instance& instance() const { return *inst_; }
  const std::shared_ptr<const Instance>& instance_ptr() const { return inst_; }

  bool is_scheduled(int op) const { return scheduled_[op] != 0; }
  // -1 for unscheduled operations.
  std::int64_t start_time(int op) const { return start_[op]; }
  std::int64_t lower_bound(int op) const { return clb_[op]; }
  const std::vector<std::int64_t>& lower_bounds() const { return clb_; }
  std::int64_t max_lower_bound() const { return max_clb_; }
  const std::vector<Interval>& machine_timeline(int machine) const { return timelines_[machine]; }
  // Index within the job of its first unscheduled operation; num_machines when done.
  int next_index(int job) const { return next_[job]; }
  int step_count() const { return step_count_; }
  bool terminal() const { return step_count_ == inst_->num_operations(); }

 private:
  friend DispatchState reset(std::shared_ptr<const Instance> inst);
  friend std::int64_t apply_step(DispatchState& state, int job);
  friend void recompute_lower_bounds(DispatchState& state);

  std::shared_ptr<const Instance> inst_;
  std::vector<std::uint8_t> scheduled_;
  std::vector<std::int64_t> start_;
  std::vector<std::int64_t> clb_;
  std::vector<std::vector<Interval>> timelines_;
  std::vector<int> next_;
  std::int64_t max_clb_ = 0;
  int step_count_ = 0;
};

struct Observation {
  int num_jobs = 0;
  // Row per operation: [scheduled flag, lower bound / feature_scale].
  Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor> node_features;
  std::vector<Edge> conj_edges;  // job precedence, static
  std::vector<Edge> disj_edges;  // consecutive operations of each machine's fixed order
  std::vector<std::uint8_t> mask;  // per job: has an unscheduled operation
  // Per job: first unscheduled operation, or the job's last operation when done.
  std::vector<int> candidates;

  int num_nodes() const { return static_cast<int>(node_features.rows()); }
  int num_legal() const;
};

inline constexpr double kDefaultFeatureScale = 1000.0;

DispatchState reset(std::shared_ptr<const Instance> inst);
inline DispatchState reset(const Instance& inst) { return reset(std::make_shared<const Instance>(inst)); }

std::vector<int> legal_actions(const DispatchState& state);
bool is_legal(const DispatchState& state, int job);

// Places the job's next operation in the earliest idle machine gap that
// starts no earlier than the job's previous completion. Returns the new state
// and reward = max lower bound before - max lower bound after.
std::pair<DispatchState, std::int64_t> step(const DispatchState& state, int job);
// In-place variant of step(); returns the reward.
std::int64_t apply_step(DispatchState& state, int job);

// Scheduled operations carry their completion time; an unscheduled operation
// carries its job predecessor's bound plus its own processing time.
std::vector<std::int64_t> compute_clb(const DispatchState& state);
void recompute_lower_bounds(DispatchState& state);

std::int64_t makespan(const DispatchState& state);

Observation observe(const DispatchState& state, double feature_scale = kDefaultFeatureScale);

// Kahn's algorithm over job precedence plus the machine orders fixed so far.
bool oriented_graph_is_acyclic(const DispatchState& state);

}  // namespace jssp

#endif  // JSSP_ENV_HPP
