#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "jssp/dataset.hpp"
#include "jssp/error.hpp"
#include "jssp/exact.hpp"
#include "jssp/pipeline.hpp"
#include "jssp/schedule.hpp"

namespace fs = std::filesystem;

namespace jssp::cli {
namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

struct NamedInstance {
  std::string name;
  std::shared_ptr<const Instance> instance;
};

// A single instance file, or every *.txt in a directory sorted by name.
std::vector<NamedInstance> load_instances(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no *.txt instance files in " + path.string());
  } else if (fs::exists(path)) {
    files.push_back(path);
  } else {
    throw IoError("no such file or directory: " + path.string());
  }
  std::vector<NamedInstance> out;
  for (const auto& f : files)
    out.push_back({f.stem().string(), std::make_shared<const Instance>(read_instance_file(f.string()))});
  return out;
}

std::vector<EvalInstance> load_eval_set(const fs::path& instances, const std::string& refs_path) {
  ReferenceMap refs;
  if (!refs_path.empty()) refs = parse_references(read_text(refs_path));
  std::vector<EvalInstance> out;
  for (auto& [name, inst] : load_instances(instances)) {
    EvalInstance e{name, inst, std::nullopt};
    if (auto it = refs.find(name); it != refs.end()) e.reference = it->second;
    out.push_back(std::move(e));
  }
  return out;
}

// Solution for instance `name`: <dir>/<name>.sol.
fs::path solution_path(const fs::path& dir, const std::string& name) { return dir / (name + ".sol"); }

Schedule load_valid_solution(const fs::path& path, const Instance& inst) {
  Schedule sched;
  try {
    sched = parse_solution(read_text(path), inst);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (auto v = validate_schedule(inst, sched)) throw ValidationError(path.string() + ": " + v->message);
  return sched;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

struct CommandLine::Impl {
  CLI::App app{"Offline learned dispatching for the job shop scheduling problem", "jssp"};
  std::map<std::string, std::function<void(std::ostream&, std::ostream&)>> handlers;
  std::map<std::string, std::string> config_files;  // subcommand -> --config value

  // gen-instances
  struct {
    int jobs = 0, machines = 0, count = 1;
    std::uint64_t seed = 0;
    std::string out, prefix = "inst";
  } gen;

  // solve
  struct {
    std::string instances, rule, out, refs;
    bool exact = false;
    std::int64_t node_budget = kDefaultNodeBudget;
    int threads = 1;
  } solve;

  // import-solutions
  struct {
    std::string instances, solutions, refs, out;
  } import;

  // make-dataset
  struct {
    std::string instances, solutions, out, reward_mode = "normalized";
    bool noisy = false;
    double p_noisy = 0.5, epsilon = 0.1;
    std::uint64_t seed = 0;
  } dataset;

  // train
  struct {
    std::string dataset, out, log, method = "mqrdqn", reward_mode, eval_instances, eval_refs;
    TrainConfig config;
  } train;

  // eval
  struct {
    std::string rule, checkpoint, instances, refs, out, name;
    int threads = 1;
  } eval;

  // report
  struct {
    std::vector<std::string> inputs;
    std::string out;
  } report;

  Impl() {
    app.require_subcommand(1);
    app.fallthrough(false);
    add_gen();
    add_solve();
    add_import();
    add_dataset();
    add_train();
    add_eval();
    add_report();
  }

  CLI::App* command(const std::string& name, const std::string& description,
                    std::function<void(std::ostream&, std::ostream&)> handler) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_files[name], "key=value file; command-line flags take precedence");
    handlers[name] = std::move(handler);
    return sub;
  }

  std::map<std::string, std::vector<CLI::Option*>> required;

  // Checked after the config file is applied, so required values may come
  // from either source.
  CLI::Option* need(CLI::App* sub, CLI::Option* opt) {
    opt->description(opt->get_description() + " (required)");
    required[sub->get_name()].push_back(opt);
    return opt;
  }

  void check_required(const CLI::App& sub) {
    for (auto* opt : required[sub.get_name()])
      if (opt->count() == 0) throw ConfigError(opt->get_name() + " is required");
  }

  void add_gen() {
    auto* s = command("gen-instances", "Generate random instances (times uniform on [1, 99])",
                      [this](std::ostream& out, std::ostream&) { run_gen(out); });
    need(s, s->add_option("--jobs", gen.jobs, "Jobs per instance")->check(CLI::PositiveNumber));
    need(s, s->add_option("--machines", gen.machines, "Machines per instance")->check(CLI::PositiveNumber));
    s->add_option("--count", gen.count, "Number of instances")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--seed", gen.seed, "Seed of the instance set")->capture_default_str();
    need(s, s->add_option("--out", gen.out, "Output directory"));
    s->add_option("--prefix", gen.prefix, "File name prefix")->capture_default_str();
  }

  void add_solve() {
    auto* s = command("solve", "Solve instances with a dispatching rule or the exact solver",
                      [this](std::ostream& out, std::ostream& err) { run_solve(out, err); });
    need(s, s->add_option("--instances", solve.instances, "Instance file or directory of *.txt"));
    auto* rule = s->add_option("--rule", solve.rule, "Dispatching rule")->check(CLI::IsMember({"spt", "mor", "mwkr"}));
    auto* exact = s->add_flag("--exact", solve.exact, "Branch and bound");
    rule->excludes(exact);
    s->add_option("--node-budget", solve.node_budget, "Search nodes per instance for --exact")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    s->add_option("--out", solve.out, "Directory for <name>.sol files");
    s->add_option("--refs", solve.refs, "Write reference makespans here");
    s->add_option("--threads", solve.threads, "Instances solved in parallel")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  void add_import() {
    auto* s = command("import-solutions", "Validate external schedules and record their makespans",
                      [this](std::ostream& out, std::ostream& err) { run_import(out, err); });
    need(s, s->add_option("--instances", import.instances, "Instance file or directory of *.txt"));
    need(s, s->add_option("--solutions", import.solutions, "Directory of <name>.sol files"));
    need(s, s->add_option("--refs", import.refs, "Reference makespan file to write"));
    s->add_option("--out", import.out, "Copy validated solutions here");
  }

  void add_dataset() {
    auto* s = command("make-dataset", "Build an expert or noisy-expert offline dataset",
                      [this](std::ostream& out, std::ostream&) { run_dataset(out); });
    need(s, s->add_option("--instances", dataset.instances, "Instance file or directory of *.txt"));
    need(s, s->add_option("--solutions", dataset.solutions, "Directory of <name>.sol expert schedules"));
    need(s, s->add_option("--out", dataset.out, "Dataset file"));
    s->add_flag("--noisy", dataset.noisy, "Inject epsilon-greedy noise into some episodes");
    s->add_option("--p-noisy", dataset.p_noisy, "Probability that an episode is noisy")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    s->add_option("--epsilon", dataset.epsilon, "Per-step deviation probability in noisy episodes")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    s->add_option("--seed", dataset.seed, "Noise seed")->capture_default_str();
    s->add_option("--reward-mode", dataset.reward_mode, "normalized | raw | scaled[:c]")->capture_default_str();
  }

  void add_train() {
    auto& c = train.config;
    auto* s = command("train", "Train an agent offline on a dataset",
                      [this](std::ostream& out, std::ostream& err) { run_train(out, err); });
    need(s, s->add_option("--dataset", train.dataset, "Dataset file"));
    need(s, s->add_option("--out", train.out, "Checkpoint file"));
    s->add_option("--log", train.log, "Training log CSV (default: stdout)");
    s->add_option("--method", train.method, "Agent")->capture_default_str()->check(
        CLI::IsMember({"mqrdqn", "dmsac", "bc"}));
    s->add_option("--steps", c.steps, "Optimisation steps")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--batch-size", c.batch_size, "Transitions per step")->capture_default_str()->check(
        CLI::PositiveNumber);
    s->add_option("--seed", c.seed, "Training seed")->capture_default_str();
    s->add_option("--lr", c.agent.adam.lr, "Adam learning rate")->capture_default_str();
    s->add_option("--alpha-cql", c.agent.alpha_cql, "CQL weight")->capture_default_str();
    s->add_option("--gamma", c.agent.gamma, "Discount")->capture_default_str();
    s->add_option("--n-quantiles", c.agent.n_quantiles, "Quantiles (mqrdqn)")->capture_default_str();
    s->add_option("--kappa", c.agent.kappa, "Huber threshold (mqrdqn)")->capture_default_str();
    s->add_option("--c-h", c.agent.c_h, "Target entropy coefficient (dmsac)")->capture_default_str();
    s->add_option("--target-update", c.agent.target_update_every, "Steps between target syncs")
        ->capture_default_str();
    s->add_option("--dropout", c.agent.dropout, "Dropout in the score head")->capture_default_str();
    s->add_option("--reward-mode", train.reward_mode, "Override the dataset's reward mode");
    s->add_option("--eval-instances", train.eval_instances, "Held-out instances for periodic evaluation");
    s->add_option("--eval-refs", train.eval_refs, "Reference makespans of the held-out instances");
    s->add_option("--eval-every", c.eval_every, "Steps between evaluations (0: final only)")->capture_default_str();
    s->add_option("--log-every", c.log_every, "Steps per log row")->capture_default_str();
    s->add_option("--checkpoint-every", c.checkpoint_every, "Steps between checkpoints (0: final only)")
        ->capture_default_str();
    s->add_option("--threads", c.eval_threads, "Evaluation threads")->capture_default_str()->check(
        CLI::PositiveNumber);
  }

  void add_eval() {
    auto* s = command("eval", "Greedy rollouts of a rule or a checkpoint; per-instance CSV",
                      [this](std::ostream& out, std::ostream& err) { run_eval(out, err); });
    auto* rule = s->add_option("--rule", eval.rule, "Dispatching rule")->check(CLI::IsMember({"spt", "mor", "mwkr"}));
    auto* ck = s->add_option("--checkpoint", eval.checkpoint, "Trained agent");
    rule->excludes(ck);
    need(s, s->add_option("--instances", eval.instances, "Instance file or directory of *.txt"));
    s->add_option("--refs", eval.refs, "Reference makespans");
    s->add_option("--out", eval.out, "Report CSV (default: stdout)");
    s->add_option("--name", eval.name, "Method label in the summary line");
    s->add_option("--threads", eval.threads, "Instances rolled out in parallel")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  void add_report() {
    auto* s = command("report", "Compare eval CSVs; methods are named after the files",
                      [this](std::ostream& out, std::ostream&) { run_report(out); });
    need(s, s->add_option("inputs,--inputs", report.inputs, "Eval CSV files"));
    s->add_option("--out", report.out, "Summary CSV");
  }

  // ---- handlers -----------------------------------------------------------

  void run_gen(std::ostream& out) {
    const auto set = generate_instance_set(gen.jobs, gen.machines, gen.count, gen.seed);
    const auto width = std::to_string(gen.count - 1).size();
    for (std::size_t i = 0; i < set.size(); ++i) {
      auto idx = std::to_string(i);
      idx.insert(0, width - idx.size(), '0');
      const auto path = fs::path(gen.out) / (gen.prefix + "_" + idx + ".txt");
      write_text(path, write_taillard(set[i]));
    }
    out << set.size() << " instances written to " << gen.out << "\n";
  }

  void run_solve(std::ostream& out, std::ostream& err) {
    if (solve.rule.empty() == !solve.exact) throw ConfigError("solve needs exactly one of --rule and --exact");
    const auto instances = load_instances(solve.instances);
    std::vector<ExactResult> results(instances.size());
    parallel_for(instances.size(), solve.threads, [&](std::size_t i) {
      const auto& inst = *instances[i].instance;
      if (solve.exact) {
        results[i] = solve_exact(inst, solve.node_budget);
      } else {
        const auto rolled = pdr_rollout(inst, *parse_rule(solve.rule));
        results[i].schedule = rolled.schedule;
      }
    });
    ReferenceMap refs;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& [name, inst] = instances[i];
      const auto& r = results[i];
      if (solve.exact && !r.optimal)
        err << "warning: node budget exhausted on " << name << ", best found " << r.schedule.makespan << "\n";
      if (!solve.out.empty()) write_text(solution_path(solve.out, name), write_solution(*inst, r.schedule));
      refs[name] = r.schedule.makespan;
      out << name << " " << r.schedule.makespan;
      if (solve.exact) out << (r.optimal ? " optimal " : " incomplete ") << r.nodes;
      out << "\n";
    }
    if (!solve.refs.empty()) write_text(solve.refs, write_references(refs));
  }

  void run_import(std::ostream& out, std::ostream& err) {
    ReferenceMap refs;
    for (const auto& [name, inst] : load_instances(import.instances)) {
      const auto path = solution_path(import.solutions, name);
      if (!fs::exists(path)) {
        err << "warning: no solution for " << name << "\n";
        continue;
      }
      const auto sched = load_valid_solution(path, *inst);
      refs[name] = sched.makespan;
      if (!import.out.empty()) write_text(solution_path(import.out, name), write_solution(*inst, sched));
    }
    if (refs.empty()) throw DataError("no solutions found in " + import.solutions);
    write_text(import.refs, write_references(refs));
    out << refs.size() << " solutions imported\n";
  }

  void run_dataset(std::ostream& out) {
    const auto rewards = RewardConfig::parse(dataset.reward_mode);
    std::vector<ExpertSolution> solutions;
    for (const auto& [name, inst] : load_instances(dataset.instances))
      solutions.push_back({name, *inst, load_valid_solution(solution_path(dataset.solutions, name), *inst)});
    Dataset ds;
    ds.manifest.reward_mode = rewards.to_string();
    ds.records = make_expert_dataset(solutions);
    if (dataset.noisy) {
      ds.records = make_noisy_dataset(ds.records, dataset.p_noisy, dataset.epsilon, dataset.seed);
      ds.manifest.noisy = true;
      ds.manifest.p_noisy = dataset.p_noisy;
      ds.manifest.epsilon = dataset.epsilon;
      ds.manifest.seed = dataset.seed;
    }
    save_dataset(dataset.out, ds);
    std::size_t noisy = 0, steps = 0;
    for (const auto& r : ds.records) {
      noisy += r.noisy;
      steps += r.actions.size();
    }
    out << ds.records.size() << " episodes (" << noisy << " noisy), " << steps << " transitions\n";
  }

  void run_train(std::ostream& out, std::ostream& err) {
    auto config = train.config;
    config.method = parse_method(train.method);
    config.checkpoint_path = train.out;
    const auto ds = load_dataset(train.dataset);
    config.rewards = RewardConfig::parse(train.reward_mode.empty() ? ds.manifest.reward_mode : train.reward_mode);
    std::vector<EvalInstance> eval_set;
    if (!train.eval_instances.empty()) {
      if (train.eval_refs.empty()) throw ConfigError("--eval-instances needs --eval-refs");
      eval_set = load_eval_set(train.eval_instances, train.eval_refs);
    }
    config.validate();

    std::ofstream log_file;
    std::ostream* log = &out;
    if (!train.log.empty()) {
      if (fs::path(train.log).has_parent_path()) fs::create_directories(fs::path(train.log).parent_path());
      log_file.open(train.log, std::ios::binary);
      if (!log_file) throw IoError("cannot write " + train.log);
      log = &log_file;
    }
    const auto result = train_offline(config, ds.records, eval_set, log);
    if (result.final_eval_gap) err << "final_eval_gap=" << format_number(*result.final_eval_gap) << "\n";
  }

  void run_eval(std::ostream& out, std::ostream& err) {
    if (!eval.rule.empty() && !eval.checkpoint.empty()) throw ConfigError("--rule and --checkpoint are exclusive");
    const auto instances = load_eval_set(eval.instances, eval.refs);
    EvalReport report;
    if (!eval.rule.empty()) {
      report = evaluate(eval.name.empty() ? eval.rule : eval.name, rule_policy(*parse_rule(eval.rule)), instances,
                        eval.threads, &err);
    } else if (!eval.checkpoint.empty()) {
      const auto agent = agent_from_checkpoint<TrainScalar>(load_checkpoint(eval.checkpoint));
      const auto label = eval.name.empty() ? method_name(agent->method()) : eval.name;
      report = evaluate(label, agent_policy(*agent), instances, eval.threads, &err);
    } else {
      throw ConfigError("eval needs --rule or --checkpoint");
    }
    const auto csv = write_eval_csv(report);
    if (eval.out.empty()) out << csv;
    else write_text(eval.out, csv);
    err << report.method << " mean_gap=" << format_number(report.mean_gap) << " std_gap="
        << format_number(report.std_gap) << " instances=" << report.rows.size() << " skipped=" << report.skipped
        << "\n";
  }

  void run_report(std::ostream& out) {
    std::vector<EvalReport> reports;
    for (const auto& path : report.inputs) reports.push_back(parse_eval_csv(read_text(path), fs::path(path).stem()));
    out << report_table(reports);
    if (!report.out.empty()) write_text(report.out, report_csv(reports));
  }

  // ---- config files -------------------------------------------------------

  // Keys are long flag names without the dashes. A key whose flag was given
  // on the command line is ignored.
  void apply_config(CLI::App& sub) {
    const auto& path = config_files[sub.get_name()];
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    for (const auto& item : CLI::ConfigINI().from_config(in)) {
      if (!item.parents.empty()) throw ConfigError(path + ": sections are not supported (" + item.fullname() + ")");
      auto* opt = sub.get_option_no_throw("--" + item.name);
      if (!opt || item.name == "config") throw ConfigError(path + ": unknown key '" + item.name + "'");
      if (opt->count() > 0) continue;
      opt->add_result(item.inputs);
      opt->run_callback();
    }
  }

  // Re-usable as a --config file for the same command.
  static std::string banner(const CLI::App& sub) {
    std::istringstream lines(sub.config_to_str(true, false));
    std::string text = "# jssp " + sub.get_name() + "\n", line;
    while (std::getline(lines, line))
      if (!line.empty() && line.rfind("config=", 0) != 0) text += line + "\n";
    return text;
  }
};

CommandLine::CommandLine() : impl_(std::make_unique<Impl>()) {}
CommandLine::~CommandLine() = default;

CLI::App& CommandLine::app() { return impl_->app; }

int CommandLine::run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto& app = impl_->app;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    auto* sub = app.get_subcommands().front();
    impl_->apply_config(*sub);
    impl_->check_required(*sub);
    err << Impl::banner(*sub);
    impl_->handlers.at(sub->get_name())(out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error kind=usage: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error kind=" << e.kind() << ": " << one_line(e.what()) << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error kind=" << e.kind() << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error kind=io: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error kind=internal: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace jssp::cli
