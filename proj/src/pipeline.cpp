#include "jssp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "jssp/env.hpp"

namespace jssp {

void TrainConfig::validate() const {
  if (steps < 1) throw ConfigError("steps must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (eval_threads < 1) throw ConfigError("eval_threads must be at least 1");
  if (eval_every < 0) throw ConfigError("eval_every must be non-negative");
  if (log_every < 1) throw ConfigError("log_every must be at least 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
  if (!(feature_scale > 0)) throw ConfigError("feature_scale must be positive");
  if (rewards.mode == RewardMode::Scaled && !(rewards.scale > 0)) throw ConfigError("reward scale must be positive");
  agent.validate();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

double parse_number(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> csv_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

}  // namespace

// ---- Training -------------------------------------------------------------

std::string train_log_header(bool with_eval) {
  return std::string("step,loss_total,loss_td,loss_cql,loss_policy,alpha") + (with_eval ? ",eval_gap" : "");
}

std::string train_log_line(const TrainLogRow& row, bool with_eval) {
  std::string line = std::to_string(row.step) + "," + format_number(row.losses.total) + "," +
                     format_number(row.losses.td) + "," + format_number(row.losses.cql) + "," +
                     format_number(row.losses.policy) + "," + format_number(row.losses.alpha);
  if (with_eval) line += "," + (row.eval_gap ? format_number(*row.eval_gap) : std::string());
  return line;
}

TrainResult train_offline(const TrainConfig& config, std::span<const EpisodeRecord> records,
                          std::span<const EvalInstance> eval_set, std::ostream* log_csv) {
  config.validate();
  if (records.empty()) throw DataError("training dataset has no episodes");
  const auto transitions = materialize(records, config.rewards, config.feature_scale);
  if (transitions.empty()) throw DataError("training dataset has no transitions");
  const bool with_eval = !eval_set.empty();
  for (const auto& e : eval_set)
    if (!e.reference) throw DataError("evaluation instance " + e.name + " has no reference makespan");

  Rng master(config.seed);
  const std::uint64_t agent_seed = master.next_u64();
  Rng sampler = master.split();

  TrainResult result;
  result.agent = make_agent<TrainScalar>(config.method, config.agent, agent_seed);
  if (log_csv) *log_csv << train_log_header(with_eval) << "\n";

  auto save = [&] {
    if (!config.checkpoint_path.empty()) save_checkpoint(config.checkpoint_path, result.agent->checkpoint());
  };

  StepLosses window;
  long window_count = 0;
  for (long step = 1; step <= config.steps; ++step) {
    const auto batch = view_batch(sample_batch(transitions, config.batch_size, sampler));
    const auto losses = result.agent->train_step(batch, step);
    window.total += losses.total;
    window.td += losses.td;
    window.cql += losses.cql;
    window.policy += losses.policy;
    window.alpha += losses.alpha;
    ++window_count;

    const bool last = step == config.steps;
    const bool eval_now = with_eval && (last || (config.eval_every > 0 && step % config.eval_every == 0));
    if (!(last || eval_now || step % config.log_every == 0)) continue;

    TrainLogRow row;
    row.step = step;
    const double n = static_cast<double>(window_count);
    row.losses = {window.total / n, window.td / n, window.cql / n, window.policy / n, window.alpha / n};
    window = StepLosses{};
    window_count = 0;
    if (eval_now) {
      const auto report = evaluate(method_name(config.method), agent_policy(*result.agent, config.feature_scale),
                                   eval_set, config.eval_threads);
      row.eval_gap = report.mean_gap;
      if (last) result.final_eval_gap = report.mean_gap;
    }
    if (log_csv) *log_csv << train_log_line(row, with_eval) << "\n" << std::flush;
    result.log.push_back(row);
    if (config.checkpoint_every > 0 && step % config.checkpoint_every == 0) save();
  }
  save();
  return result;
}

// ---- Evaluation -----------------------------------------------------------

Policy rule_policy(DispatchRule rule) {
  return [rule](const DispatchState& state) { return pdr_action(state, rule); };
}

Policy agent_policy(const Agent<TrainScalar>& agent, double feature_scale) {
  return [&agent, feature_scale](const DispatchState& state) { return agent.act(observe(state, feature_scale)); };
}

RolloutOutcome greedy_rollout(const Instance& inst, const Policy& policy) {
  auto state = reset(std::make_shared<const Instance>(inst));
  RolloutOutcome out;
  out.initial_bound = state.max_lower_bound();
  while (!state.terminal()) {
    const int job = policy(state);
    if (!is_legal(state, job)) throw StateError("policy chose masked job " + std::to_string(job));
    out.actions.push_back(job);
    out.total_reward += apply_step(state, job);
  }
  out.makespan = makespan(state);
  if (out.total_reward != out.initial_bound - out.makespan)
    throw StateError("rewards do not telescope to initial bound - makespan");
  return out;
}

double gap_percent(std::int64_t makespan, std::int64_t reference) {
  if (reference <= 0) throw DataError("reference makespan must be positive");
  return static_cast<double>(makespan - reference) / static_cast<double>(reference) * 100.0;
}

void summarize(EvalReport& report) {
  report.skipped = 0;
  double sum = 0, sum_ms = 0;
  int count = 0;
  for (const auto& r : report.rows) {
    sum_ms += r.millis;
    if (!r.reference) {
      ++report.skipped;
      continue;
    }
    sum += r.gap_pct;
    ++count;
  }
  report.mean_gap = count ? sum / count : std::numeric_limits<double>::quiet_NaN();
  double var = 0;
  for (const auto& r : report.rows)
    if (r.reference) var += (r.gap_pct - report.mean_gap) * (r.gap_pct - report.mean_gap);
  report.std_gap = count ? std::sqrt(var / count) : std::numeric_limits<double>::quiet_NaN();
  report.mean_millis = report.rows.empty() ? 0.0 : sum_ms / static_cast<double>(report.rows.size());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = static_cast<int>(std::clamp<std::size_t>(count, 1, static_cast<std::size_t>(std::max(1, threads))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

EvalReport evaluate(const std::string& method, const Policy& policy, std::span<const EvalInstance> instances,
                    int threads, std::ostream* warnings) {
  EvalReport report;
  report.method = method;
  report.rows.resize(instances.size());
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    const auto& e = instances[i];
    const auto start = std::chrono::steady_clock::now();
    const auto outcome = greedy_rollout(*e.instance, policy);
    EvalRow& row = report.rows[i];
    row.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    row.instance = e.name;
    row.makespan = outcome.makespan;
    row.reference = e.reference;
    row.gap_pct =
        e.reference ? gap_percent(outcome.makespan, *e.reference) : std::numeric_limits<double>::quiet_NaN();
  });

  summarize(report);
  if (warnings)
    for (const auto& r : report.rows)
      if (!r.reference) *warnings << "warning: no reference for " << r.instance << ", excluded from the gap\n";
  return report;
}

std::string write_eval_csv(const EvalReport& report) {
  std::string out = "instance,C,C_star,gap_pct,millis\n";
  for (const auto& r : report.rows) {
    if (r.instance.find(',') != std::string::npos) throw IoError("instance name contains a comma: " + r.instance);
    out += r.instance + "," + std::to_string(r.makespan) + ",";
    if (r.reference) out += std::to_string(*r.reference) + "," + format_number(r.gap_pct);
    else out += ",";
    out += "," + format_number(r.millis) + "\n";
  }
  return out;
}

EvalReport parse_eval_csv(std::string_view text, const std::string& method) {
  const auto lines = csv_lines(text);
  if (lines.empty() || lines[0] != "instance,C,C_star,gap_pct,millis") throw ParseError("missing eval CSV header");
  EvalReport report;
  report.method = method;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    if (f.size() != 5) throw ParseError("line " + std::to_string(i + 1) + ": expected 5 fields");
    EvalRow row;
    row.instance = std::string(f[0]);
    row.makespan = static_cast<std::int64_t>(parse_number(f[1]));
    if (!f[2].empty()) {
      row.reference = static_cast<std::int64_t>(parse_number(f[2]));
      row.gap_pct = parse_number(f[3]);
    } else {
      row.gap_pct = std::numeric_limits<double>::quiet_NaN();
    }
    row.millis = parse_number(f[4]);
    report.rows.push_back(std::move(row));
  }
  summarize(report);
  return report;
}

namespace {

std::vector<const EvalReport*> sorted_reports(std::span<const EvalReport> reports) {
  std::vector<const EvalReport*> order;
  for (const auto& r : reports) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const EvalReport* a, const EvalReport* b) {
    // NaN means no usable rows; those go last.
    if (std::isnan(a->mean_gap)) return false;
    if (std::isnan(b->mean_gap)) return true;
    return a->mean_gap < b->mean_gap;
  });
  return order;
}

}  // namespace

std::string report_table(std::span<const EvalReport> reports) {
  const auto order = sorted_reports(reports);
  std::size_t width = 6;
  for (const auto* r : order) width = std::max(width, r->method.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "method" << "  " << std::right << std::setw(9)
      << "instances" << "  " << std::setw(17) << "gap % (mean±std)" << "  " << std::setw(10) << "ms/inst" << "\n";
  for (const auto* r : order) {
    std::ostringstream gap;
    gap << std::fixed << std::setprecision(2) << r->mean_gap << " ± " << r->std_gap;
    std::ostringstream ms;
    ms << std::fixed << std::setprecision(2) << r->mean_millis;
    out << std::left << std::setw(static_cast<int>(width)) << r->method << "  " << std::right << std::setw(9)
        << (r->rows.size() - static_cast<std::size_t>(r->skipped)) << "  " << std::setw(18) << gap.str() << "  "
        << std::setw(10) << ms.str() << "\n";
  }
  return out.str();
}

std::string report_csv(std::span<const EvalReport> reports) {
  std::string out = "method,instances,skipped,mean_gap,std_gap,mean_millis\n";
  for (const auto* r : sorted_reports(reports))
    out += r->method + "," + std::to_string(r->rows.size()) + "," + std::to_string(r->skipped) + "," +
           format_number(r->mean_gap) + "," + format_number(r->std_gap) + "," + format_number(r->mean_millis) + "\n";
  return out;
}

std::vector<ReportSummary> parse_report_csv(std::string_view text) {
  const auto lines = csv_lines(text);
  if (lines.empty() || lines[0] != "method,instances,skipped,mean_gap,std_gap,mean_millis")
    throw ParseError("missing report CSV header");
  std::vector<ReportSummary> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv(lines[i]);
    if (f.size() != 6) throw ParseError("line " + std::to_string(i + 1) + ": expected 6 fields");
    out.push_back({std::string(f[0]), static_cast<int>(parse_number(f[1])), static_cast<int>(parse_number(f[2])),
                   parse_number(f[3]), parse_number(f[4]), parse_number(f[5])});
  }
  return out;
}

std::vector<Instance> generate_instance_set(int jobs, int machines, int count, std::uint64_t seed) {
  if (count < 0) throw DimensionError("instance count must be non-negative");
  Rng master(seed);
  std::vector<Instance> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(generate_instance(jobs, machines, master.next_u64()));
  return out;
}

}  // namespace jssp
