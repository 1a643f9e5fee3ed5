#ifndef JSSP_PIPELINE_HPP
#define JSSP_PIPELINE_HPP

// Offline training loop, greedy evaluation against reference makespans and
// comparison reports.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jssp/agents.hpp"
#include "jssp/dataset.hpp"
#include "jssp/instance.hpp"
#include "jssp/pdr.hpp"

namespace jssp {

// Precision of trained models; tests instantiate the agents in double.
using TrainScalar = float;

struct EvalInstance {
  std::string name;
  std::shared_ptr<const Instance> instance;
  std::optional<std::int64_t> reference;  // C*
};

struct TrainConfig {
  Method method = Method::Mqrdqn;
  long steps = 50000;
  std::size_t batch_size = 64;
  std::uint64_t seed = 600;
  AgentConfig agent{};
  RewardConfig rewards{};
  double feature_scale = kDefaultFeatureScale;
  long eval_every = 2500;  // 0 disables periodic evaluation
  int eval_threads = 1;
  long log_every = 100;    // loss columns average over this many steps
  long checkpoint_every = 0;
  std::string checkpoint_path;  // periodic and final checkpoint; empty keeps it in memory

  // Throws ConfigError.
  void validate() const;
};

struct TrainLogRow {
  long step = 0;
  StepLosses losses;  // mean over the window ending at `step`
  std::optional<double> eval_gap;
};

struct TrainResult {
  std::unique_ptr<Agent<TrainScalar>> agent;
  std::vector<TrainLogRow> log;
  std::optional<double> final_eval_gap;
};

// Runs the configured number of optimisation steps on the materialised
// records. Deterministic for a fixed config. When `eval_set` is non-empty the
// greedy policy is evaluated every eval_every steps and after the last step.
// Each log row is also written to `log_csv` as it is produced.
TrainResult train_offline(const TrainConfig& config, std::span<const EpisodeRecord> records,
                          std::span<const EvalInstance> eval_set = {}, std::ostream* log_csv = nullptr);

std::string train_log_header(bool with_eval);
std::string train_log_line(const TrainLogRow& row, bool with_eval);

// ---- Evaluation ----------------------------------------------------------

// Chooses a legal job for a non-terminal state. Must be safe to call from
// several threads at once.
using Policy = std::function<int(const DispatchState&)>;

Policy rule_policy(DispatchRule rule);
// Greedy over unmasked jobs; the agent must outlive the policy.
Policy agent_policy(const Agent<TrainScalar>& agent, double feature_scale = kDefaultFeatureScale);

struct RolloutOutcome {
  std::int64_t makespan = 0;
  std::int64_t total_reward = 0;
  std::int64_t initial_bound = 0;
  std::vector<int> actions;
};

// Runs the policy to completion. Throws StateError if the policy picks an
// illegal job or the rewards do not sum to initial bound - makespan.
RolloutOutcome greedy_rollout(const Instance& inst, const Policy& policy);

struct EvalRow {
  std::string instance;
  std::int64_t makespan = 0;
  std::optional<std::int64_t> reference;
  double gap_pct = 0;  // NaN without a reference
  double millis = 0;
};

struct EvalReport {
  std::string method;
  std::vector<EvalRow> rows;
  int skipped = 0;  // rows without a reference
  double mean_gap = 0;
  double std_gap = 0;  // population standard deviation
  double mean_millis = 0;
};

double gap_percent(std::int64_t makespan, std::int64_t reference);

// Calls body(i) for i in [0, count) on up to `threads` threads. The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

// Rows keep the input order regardless of `threads`. Instances without a
// reference are rolled out, reported and excluded from the gap statistics;
// a warning per instance goes to `warnings` when given.
EvalReport evaluate(const std::string& method, const Policy& policy, std::span<const EvalInstance> instances,
                    int threads = 1, std::ostream* warnings = nullptr);

// Recomputes the aggregate fields from the rows.
void summarize(EvalReport& report);

// Per-instance CSV: instance,C,C_star,gap_pct,millis.
std::string write_eval_csv(const EvalReport& report);
EvalReport parse_eval_csv(std::string_view text, const std::string& method);

// Methods sorted by mean gap, ascending.
std::string report_table(std::span<const EvalReport> reports);
// method,instances,skipped,mean_gap,std_gap,mean_millis
std::string report_csv(std::span<const EvalReport> reports);

struct ReportSummary {
  std::string method;
  int instances = 0;
  int skipped = 0;
  double mean_gap = 0;
  double std_gap = 0;
  double mean_millis = 0;
};
std::vector<ReportSummary> parse_report_csv(std::string_view text);

// Shortest text that parses back to the same double.
std::string format_number(double v);

// Instance i of a set is generate_instance(jobs, machines, s_i) where s_i is
// the i-th draw of an Rng seeded with `seed`.
std::vector<Instance> generate_instance_set(int jobs, int machines, int count, std::uint64_t seed);

}  // namespace jssp

#endif  // JSSP_PIPELINE_HPP
