#ifndef JSSP_DATASET_HPP
#define JSSP_DATASET_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jssp/env.hpp"
#include "jssp/instance.hpp"
#include "jssp/rng.hpp"
#include "jssp/schedule.hpp"

namespace jssp {

// One offline episode, stored compactly as the instance plus its dispatch
// sequence. Transitions are recovered by replaying the actions.
struct EpisodeRecord {
  std::string name;
  std::shared_ptr<const Instance> instance;
  std::vector<int> actions;
  bool noisy = false;
  std::int64_t expert_makespan = 0;  // makespan of the expert episode this record derives from
};

struct ExpertSolution {
  std::string name;
  Instance instance;
  Schedule schedule;
};

std::vector<EpisodeRecord> make_expert_dataset(std::span<const ExpertSolution> solutions);

// Each episode becomes noisy with probability p_noisy. In a noisy episode the
// expert's next action is replaced with probability epsilon by a uniformly
// random legal job. The expert pointer then skips operations that noise has
// already scheduled and otherwise keeps the expert order.
std::vector<EpisodeRecord> make_noisy_dataset(std::span<const EpisodeRecord> expert, double p_noisy, double epsilon,
                                              std::uint64_t seed);

// Raw per-step rewards from replaying the record. Throws DataError on an
// illegal or incomplete action sequence.
std::vector<std::int64_t> episode_rewards(const EpisodeRecord& record);

// r_t / expert_makespan per step, per record.
std::vector<std::vector<double>> normalize_rewards(std::span<const EpisodeRecord> records);

enum class RewardMode { Normalized, Scaled, Raw };

struct RewardConfig {
  RewardMode mode = RewardMode::Normalized;
  double scale = 0.01;  // used by Scaled

  std::string to_string() const;
  static RewardConfig parse(std::string_view text);  // "normalized", "raw", "scaled" or "scaled:<c>"
};

struct Transition {
  std::shared_ptr<const Observation> obs;
  int action = 0;
  float reward = 0.0f;
  std::shared_ptr<const Observation> next_obs;
  bool terminal = false;

  const std::vector<std::uint8_t>& next_mask() const { return next_obs->mask; }
};

std::vector<Transition> materialize(std::span<const EpisodeRecord> records, const RewardConfig& rewards,
                                    double feature_scale = kDefaultFeatureScale);

// Uniform with replacement.
std::vector<const Transition*> sample_batch(std::span<const Transition> transitions, std::size_t batch_size, Rng& rng);

struct DatasetManifest {
  int version = 1;
  std::string reward_mode = "normalized";  // intended materialization; can be overridden at train time
  bool noisy = false;
  double p_noisy = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<EpisodeRecord> records;
};

// Line-oriented text container. Loading replays every episode and rejects
// illegal sequences.
std::string write_dataset(const Dataset& dataset);
Dataset parse_dataset(std::string_view text);
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

}  // namespace jssp

#endif  // JSSP_DATASET_HPP
