#include "jssp/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "jssp/error.hpp"

namespace jssp {

std::vector<EpisodeRecord> make_expert_dataset(std::span<const ExpertSolution> solutions) {
  std::vector<EpisodeRecord> out;
  out.reserve(solutions.size());
  for (const auto& sol : solutions) {
    if (auto v = validate_schedule(sol.instance, sol.schedule))
      throw ValidationError(sol.name + ": invalid expert schedule: " + v->message);
    EpisodeRecord rec;
    rec.name = sol.name;
    rec.instance = std::make_shared<const Instance>(sol.instance);
    rec.actions = schedule_to_actions(sol.instance, sol.schedule);
    rec.noisy = false;
    rec.expert_makespan = sol.schedule.makespan;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EpisodeRecord> make_noisy_dataset(std::span<const EpisodeRecord> expert, double p_noisy, double epsilon,
                                              std::uint64_t seed) {
  if (!(p_noisy >= 0.0 && p_noisy <= 1.0) || !(epsilon >= 0.0 && epsilon <= 1.0))
    throw ConfigError("p_noisy and epsilon must lie in [0, 1]");
  Rng rng(seed);
  std::vector<EpisodeRecord> out;
  out.reserve(expert.size());
  for (const auto& src : expert) {
    EpisodeRecord rec = src;
    rec.noisy = rng.bernoulli(p_noisy);
    if (!rec.noisy) {
      out.push_back(std::move(rec));
      continue;
    }
    const auto& inst = *src.instance;
    // Expert sequence as operation ids: the k-th dispatch of job j is O(j, k).
    std::vector<int> expert_ops;
    std::vector<int> seen(inst.num_jobs, 0);
    for (int j : src.actions) expert_ops.push_back(inst.op_id(j, seen[j]++));

    auto state = reset(src.instance);
    std::size_t cursor = 0;
    rec.actions.clear();
    auto random_legal = [&] {
      const auto legal = legal_actions(state);
      return legal[rng.below(legal.size())];
    };
    while (!state.terminal()) {
      while (cursor < expert_ops.size() && state.is_scheduled(expert_ops[cursor])) ++cursor;
      int action = -1;
      if (cursor < expert_ops.size()) action = inst.job_of(expert_ops[cursor]);
      if (action < 0 || !is_legal(state, action)) action = random_legal();
      if (rng.bernoulli(epsilon)) action = random_legal();
      apply_step(state, action);
      rec.actions.push_back(action);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::int64_t> episode_rewards(const EpisodeRecord& record) {
  const auto& inst = *record.instance;
  if (static_cast<int>(record.actions.size()) != inst.num_operations())
    throw DataError(record.name + ": expected " + std::to_string(inst.num_operations()) + " actions, found " +
                    std::to_string(record.actions.size()));
  auto state = reset(record.instance);
  std::vector<std::int64_t> rewards;
  rewards.reserve(record.actions.size());
  for (std::size_t t = 0; t < record.actions.size(); ++t) {
    if (!is_legal(state, record.actions[t]))
      throw DataError(record.name + ": illegal action at step " + std::to_string(t));
    rewards.push_back(apply_step(state, record.actions[t]));
  }
  return rewards;
}

std::vector<std::vector<double>> normalize_rewards(std::span<const EpisodeRecord> records) {
  std::vector<std::vector<double>> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (rec.expert_makespan <= 0) throw DataError(rec.name + ": expert makespan must be positive");
    const auto raw = episode_rewards(rec);
    std::vector<double> norm(raw.size());
    for (std::size_t t = 0; t < raw.size(); ++t)
      norm[t] = static_cast<double>(raw[t]) / static_cast<double>(rec.expert_makespan);
    out.push_back(std::move(norm));
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError(where + "bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string RewardConfig::to_string() const {
  switch (mode) {
    case RewardMode::Normalized: return "normalized";
    case RewardMode::Raw: return "raw";
    case RewardMode::Scaled: return "scaled:" + format_double(scale);
  }
  return "normalized";
}

RewardConfig RewardConfig::parse(std::string_view text) {
  RewardConfig cfg;
  if (text == "normalized") {
    cfg.mode = RewardMode::Normalized;
  } else if (text == "raw") {
    cfg.mode = RewardMode::Raw;
  } else if (text == "scaled") {
    cfg.mode = RewardMode::Scaled;
  } else if (text.starts_with("scaled:")) {
    cfg.mode = RewardMode::Scaled;
    cfg.scale = parse_double(text.substr(7), "reward mode: ");
  } else {
    throw ConfigError("unknown reward mode '" + std::string(text) + "'");
  }
  return cfg;
}

std::vector<Transition> materialize(std::span<const EpisodeRecord> records, const RewardConfig& rewards,
                                    double feature_scale) {
  std::vector<Transition> out;
  for (const auto& rec : records) {
    if (rec.expert_makespan <= 0) throw DataError(rec.name + ": expert makespan must be positive");
    const auto& inst = *rec.instance;
    if (static_cast<int>(rec.actions.size()) != inst.num_operations())
      throw DataError(rec.name + ": corrupted dataset, wrong episode length");
    auto state = reset(rec.instance);
    auto obs = std::make_shared<const Observation>(observe(state, feature_scale));
    for (std::size_t t = 0; t < rec.actions.size(); ++t) {
      const int a = rec.actions[t];
      if (!is_legal(state, a)) throw DataError(rec.name + ": corrupted dataset, illegal action at step " + std::to_string(t));
      const auto raw = static_cast<double>(apply_step(state, a));
      double r = raw;
      switch (rewards.mode) {
        case RewardMode::Normalized: r = raw / static_cast<double>(rec.expert_makespan); break;
        case RewardMode::Scaled: r = raw * rewards.scale; break;
        case RewardMode::Raw: break;
      }
      auto next = std::make_shared<const Observation>(observe(state, feature_scale));
      Transition tr;
      tr.obs = obs;
      tr.action = a;
      tr.reward = static_cast<float>(r);
      tr.next_obs = next;
      tr.terminal = state.terminal();
      out.push_back(std::move(tr));
      obs = std::move(next);
    }
  }
  return out;
}

std::vector<const Transition*> sample_batch(std::span<const Transition> transitions, std::size_t batch_size, Rng& rng) {
  if (transitions.empty()) throw DataError("cannot sample from an empty dataset");
  std::vector<const Transition*> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) out.push_back(&transitions[rng.below(transitions.size())]);
  return out;
}

// Format:
//   jssp-dataset <version>
//   reward_mode <mode> / noisy <0|1> / p_noisy <v> / epsilon <v> / seed <s> / episodes <n>
//   then per episode:
//   episode <name> noisy <0|1> expert_makespan <c>
//   <Taillard instance text>
//   actions <a0> <a1> ...
//   end
std::string write_dataset(const Dataset& ds) {
  const auto& m = ds.manifest;
  std::string out = "jssp-dataset " + std::to_string(m.version) + "\n";
  out += "reward_mode " + m.reward_mode + "\n";
  out += "noisy " + std::string(m.noisy ? "1" : "0") + "\n";
  out += "p_noisy " + format_double(m.p_noisy) + "\n";
  out += "epsilon " + format_double(m.epsilon) + "\n";
  out += "seed " + std::to_string(m.seed) + "\n";
  out += "episodes " + std::to_string(ds.records.size()) + "\n";
  for (const auto& rec : ds.records) {
    out += "episode " + rec.name + " noisy " + (rec.noisy ? "1" : "0") + " expert_makespan " +
           std::to_string(rec.expert_makespan) + "\n";
    out += write_taillard(*rec.instance);
    out += "actions";
    for (int a : rec.actions) out += " " + std::to_string(a);
    out += "\nend\n";
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  std::size_t i = 0;
  auto where = [&] { return "line " + std::to_string(i + 1) + ": "; };
  auto expect_key = [&](const std::string& key) -> std::string {
    if (i >= lines.size()) throw ParseError(where() + "unexpected end of dataset, expected '" + key + "'");
    const auto& line = lines[i];
    if (!line.starts_with(key + " ")) throw ParseError(where() + "expected '" + key + "'");
    return line.substr(key.size() + 1);
  };

  Dataset ds;
  auto& m = ds.manifest;
  {
    const auto v = expect_key("jssp-dataset");
    m.version = static_cast<int>(parse_double(v, where()));
    if (m.version != 1) throw CompatibilityError("unsupported dataset version " + v);
    ++i;
  }
  m.reward_mode = expect_key("reward_mode");
  RewardConfig::parse(m.reward_mode);
  ++i;
  m.noisy = expect_key("noisy") == "1";
  ++i;
  m.p_noisy = parse_double(expect_key("p_noisy"), where());
  ++i;
  m.epsilon = parse_double(expect_key("epsilon"), where());
  ++i;
  try {
    m.seed = std::stoull(expect_key("seed"));
  } catch (const std::logic_error&) {
    throw ParseError(where() + "bad seed");
  }
  ++i;
  const auto count = static_cast<std::size_t>(parse_double(expect_key("episodes"), where()));
  ++i;

  for (std::size_t e = 0; e < count; ++e) {
    std::istringstream hs(expect_key("episode"));
    EpisodeRecord rec;
    std::string noisy_key, makespan_key;
    int noisy = 0;
    if (!(hs >> rec.name >> noisy_key >> noisy >> makespan_key >> rec.expert_makespan) || noisy_key != "noisy" ||
        makespan_key != "expert_makespan")
      throw ParseError(where() + "malformed episode header");
    rec.noisy = noisy != 0;
    ++i;
    // Instance block runs until the actions line.
    std::string inst_text;
    const auto inst_line = i;
    while (i < lines.size() && !lines[i].starts_with("actions")) inst_text += lines[i++] + "\n";
    try {
      rec.instance = std::make_shared<const Instance>(parse_taillard(inst_text));
    } catch (const ParseError& err) {
      throw ParseError("episode starting at line " + std::to_string(inst_line + 1) + ": " + err.what());
    }
    if (i >= lines.size()) throw ParseError(where() + "missing actions line");
    std::istringstream as(lines[i].substr(7));
    int a = 0;
    while (as >> a) rec.actions.push_back(a);
    if (!as.eof()) throw ParseError(where() + "malformed actions");
    ++i;
    if (i >= lines.size() || lines[i] != "end") throw ParseError(where() + "expected 'end'");
    ++i;
    if (rec.expert_makespan <= 0) throw DataError(rec.name + ": expert makespan must be positive");
    episode_rewards(rec);  // replays and rejects illegal sequences
    ds.records.push_back(std::move(rec));
  }
  while (i < lines.size() && lines[i].empty()) ++i;
  if (i != lines.size()) throw ParseError(where() + "trailing content");
  return ds;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path);
  out << write_dataset(dataset);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

}  // namespace jssp
