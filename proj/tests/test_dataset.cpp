#include <doctest.h>

#include "jssp/dataset.hpp"
#include "jssp/error.hpp"
#include "jssp/exact.hpp"

using namespace jssp;

namespace {

Instance make(std::vector<std::vector<int>> routing, std::vector<std::vector<int>> times) {
  Instance inst;
  inst.num_jobs = static_cast<int>(routing.size());
  inst.num_machines = static_cast<int>(routing[0].size());
  inst.routing = std::move(routing);
  inst.proc_times = std::move(times);
  return inst;
}

std::vector<ExpertSolution> oracle_solutions(int count, int jobs, int machines, std::uint64_t seed) {
  std::vector<ExpertSolution> out;
  for (int i = 0; i < count; ++i) {
    auto inst = generate_instance(jobs, machines, seed + i);
    auto sched = solve_exact(inst).schedule;
    out.push_back({"inst_" + std::to_string(i), std::move(inst), std::move(sched)});
  }
  return out;
}

}  // namespace

TEST_CASE("expert dataset from oracle schedules") {
  const auto sols = oracle_solutions(100, 6, 6, 200);
  const auto records = make_expert_dataset(sols);
  REQUIRE(records.size() == 100);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].actions.size() == 36);
    CHECK_FALSE(records[i].noisy);
    CHECK(records[i].expert_makespan == sols[i].schedule.makespan);
    const auto rewards = episode_rewards(records[i]);
    std::int64_t total = 0;
    for (auto r : rewards) total += r;
    CHECK(total == reset(sols[i].instance).max_lower_bound() - sols[i].schedule.makespan);
  }

  const auto one = make_expert_dataset(oracle_solutions(1, 1, 1, 3));
  CHECK(one[0].actions == std::vector<int>{0});
}

TEST_CASE("invalid expert schedules abort the build") {
  const auto inst = make({{0}, {0}}, {{3}, {5}});
  std::vector<ExpertSolution> sols{{"bad", inst, Schedule{{0, 1}, 6, ScheduleSource::External}}};
  CHECK_THROWS_AS(make_expert_dataset(sols), ValidationError);
}

TEST_CASE("noisy dataset generation") {
  const auto expert = make_expert_dataset(oracle_solutions(100, 6, 6, 200));

  SUBCASE("p_noisy = 0 copies the expert") {
    const auto out = make_noisy_dataset(expert, 0.0, 0.1, 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].actions == expert[i].actions);
      CHECK_FALSE(out[i].noisy);
    }
  }
  SUBCASE("p_noisy 0.5, epsilon 0.1 flags about half the episodes") {
    const auto out = make_noisy_dataset(expert, 0.5, 0.1, 0);
    int noisy = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      noisy += out[i].noisy;
      CHECK(out[i].expert_makespan == expert[i].expert_makespan);
      if (!out[i].noisy) CHECK(out[i].actions == expert[i].actions);
      CHECK_NOTHROW(episode_rewards(out[i]));
    }
    // Binomial(100, 0.5): 4 standard deviations either side.
    CHECK(noisy >= 30);
    CHECK(noisy <= 70);
    CHECK(make_noisy_dataset(expert, 0.5, 0.1, 0)[7].actions == out[7].actions);
  }
  SUBCASE("p_noisy = 1, epsilon = 1 stays feasible") {
    const auto out = make_noisy_dataset(expert, 1.0, 1.0, 5);
    int differ = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].noisy);
      CHECK(out[i].actions.size() == 36);
      CHECK_NOTHROW(episode_rewards(out[i]));
      differ += out[i].actions != expert[i].actions;
    }
    CHECK(differ > 90);
  }
  SUBCASE("noise with epsilon = 0 follows the expert") {
    const auto out = make_noisy_dataset(expert, 1.0, 0.0, 5);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].actions == expert[i].actions);
  }
  CHECK_THROWS_AS(make_noisy_dataset(expert, 1.5, 0.1, 0), ConfigError);
}

TEST_CASE("reward normalization") {
  EpisodeRecord rec;
  rec.name = "pair";
  rec.instance = std::make_shared<const Instance>(make({{0}, {0}}, {{50}, {450}}));
  rec.actions = {0, 1};
  rec.expert_makespan = 500;
  const auto norm = normalize_rewards(std::span(&rec, 1));
  CHECK(norm[0][0] == 0.0);
  CHECK(norm[0][1] == doctest::Approx(-0.1));

  rec.expert_makespan = 0;
  CHECK_THROWS_AS(normalize_rewards(std::span(&rec, 1)), DataError);
}

TEST_CASE("normalized rewards are invariant to scaling processing times") {
  auto sols = oracle_solutions(10, 4, 4, 31);
  const auto base = make_expert_dataset(sols);
  auto scaled = base;
  for (auto& rec : scaled) {
    Instance inst = *rec.instance;
    for (auto& row : inst.proc_times)
      for (auto& p : row) p *= 3;
    rec.instance = std::make_shared<const Instance>(inst);
    rec.expert_makespan *= 3;
  }
  const auto a = normalize_rewards(base);
  const auto b = normalize_rewards(scaled);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto raw_a = episode_rewards(base[i]);
    const auto raw_b = episode_rewards(scaled[i]);
    for (std::size_t t = 0; t < a[i].size(); ++t) {
      CHECK(raw_b[t] == 3 * raw_a[t]);
      CHECK(a[i][t] == doctest::Approx(b[i][t]));
    }
    double ret = 0;
    for (double r : a[i]) ret += r;
    const double lb0 = static_cast<double>(reset(*base[i].instance).max_lower_bound());
    CHECK(ret == doctest::Approx((lb0 - base[i].expert_makespan) / base[i].expert_makespan));
    CHECK(ret <= 0.0);
  }
}

TEST_CASE("materialization") {
  const auto records = make_expert_dataset(oracle_solutions(100, 6, 6, 200));
  const auto norm = materialize(records, RewardConfig{});
  CHECK(norm.size() == 3600);
  const auto raw = materialize(records, RewardConfig::parse("raw"));
  const auto scaled = materialize(records, RewardConfig::parse("scaled:0.01"));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    CHECK(scaled[i].reward == doctest::Approx(raw[i].reward * 0.01f));
    CHECK(norm[i].obs->mask[norm[i].action] == 1);
    CHECK(norm[i].terminal == (i % 36 == 35));
  }
  // Consecutive transitions share the observation object.
  CHECK(norm[0].next_obs.get() == norm[1].obs.get());

  EpisodeRecord rec;
  rec.name = "pair";
  rec.instance = std::make_shared<const Instance>(make({{0}, {0}}, {{3}, {5}}));
  rec.actions = {0, 1};
  rec.expert_makespan = 8;
  const auto tr = materialize(std::span(&rec, 1), RewardConfig::parse("raw"));
  CHECK(tr[1].reward == -3.0f);
  CHECK(tr[1].terminal);
  CHECK(tr[1].next_mask() == std::vector<std::uint8_t>{0, 0});

  rec.actions = {0, 0};
  CHECK_THROWS_AS(materialize(std::span(&rec, 1), RewardConfig{}), DataError);
}

TEST_CASE("batch sampling") {
  const auto records = make_expert_dataset(oracle_solutions(3, 3, 3, 1));
  const auto tr = materialize(records, RewardConfig{});
  Rng a(9), b(9);
  const auto batch = sample_batch(tr, 64, a);
  CHECK(batch.size() == 64);
  CHECK(sample_batch(tr, 64, b) == batch);
  const auto single = std::span(tr).first(1);
  CHECK(sample_batch(single, 1, a)[0] == &tr[0]);
  CHECK_THROWS_AS(sample_batch(std::span<const Transition>{}, 1, a), DataError);
}

TEST_CASE("dataset files round-trip and are validated on load") {
  Dataset ds;
  ds.manifest.noisy = true;
  ds.manifest.p_noisy = 0.5;
  ds.manifest.epsilon = 0.1;
  ds.manifest.seed = 0;
  ds.records = make_noisy_dataset(make_expert_dataset(oracle_solutions(5, 4, 3, 8)), 0.5, 0.1, 0);
  const auto text = write_dataset(ds);
  const auto back = parse_dataset(text);
  CHECK(write_dataset(back) == text);
  CHECK(back.manifest.p_noisy == 0.5);
  CHECK(back.manifest.epsilon == 0.1);
  REQUIRE(back.records.size() == 5);
  CHECK(back.records[2].actions == ds.records[2].actions);
  CHECK(*back.records[2].instance == *ds.records[2].instance);

  auto corrupt = text;
  const auto pos = corrupt.find("actions ");
  corrupt.replace(pos, 9, "actions 9");  // job 9 does not exist
  CHECK_THROWS(parse_dataset(corrupt));
  CHECK_THROWS_AS(parse_dataset("jssp-dataset 2\n"), CompatibilityError);
  CHECK_THROWS_AS(parse_dataset("bogus\n"), ParseError);
}
