// src/cli.cpp

#include "forager/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "forager/config_io.hpp"
#include "forager/error.hpp"
#include "forager/eval.hpp"

namespace forager {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// Writes go to a hidden directory inside the target and are moved into place
// only once every artifact exists; on failure nothing is left behind.
class Staging {
 public:
  explicit Staging(fs::path target) : target_(std::move(target)) {
    fs::create_directories(target_);
    dir_ = target_ / (".partial-" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }
  void write(const std::string& name, const std::string& content) { write_file(path(name), content); }

  /// Final paths of everything staged so far.
  std::vector<std::string> artifacts() const {
    std::vector<std::string> out;
    for (const auto& n : names_) out.push_back((target_ / n).string());
    return out;
  }

  void commit() {
    for (const auto& n : names_) {
      const fs::path dst = target_ / n;
      if (fs::exists(dst)) fs::remove_all(dst);
      fs::rename(dir_ / n, dst);
    }
  }

 private:
  fs::path target_;
  fs::path dir_;
  std::vector<std::string> names_;
};

std::string resolve_out_dir(const std::string& given) {
  if (!given.empty()) return given;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  throw UsageError(std::string("no output directory: pass -o or set ") + kOutDirEnv);
}

ordered_json manifest_base(const std::string& command, const std::vector<std::string>& args) {
  ordered_json m;
  m["tool"] = "forager";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["args"] = args;
  return m;
}

TickWindow parse_window(const std::string& spec, const Landscape& s, const ForagerConfig& c) {
  if (spec == "test") return test_window(s, c);
  if (spec == "setup") return setup_window(s, c);
  if (spec == "all") return {0, s.T_total};
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    try {
      return {std::stoi(spec.substr(0, colon)), std::stoi(spec.substr(colon + 1))};
    } catch (const std::exception&) {
    }
  }
  throw UsageError("--window expects test, setup, all or BEGIN:END");
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

// --- gen -------------------------------------------------------------------

struct GenArgs {
  std::string preset = "ucr-like";
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_gen(const GenArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const Landscape s = generate_scenario(scenario_preset(a.preset), a.seed);
  const fs::path path(a.output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path manifest = fs::path(path.string() + ".manifest.json");
  const fs::path tmp = fs::path(path.string() + ".tmp");
  write_file(tmp, serialize_scenario(s));
  ordered_json m = manifest_base("gen", argv);
  m["preset"] = a.preset;
  m["seed"] = a.seed;
  m["scenario"] = fs::absolute(path).string();
  m["output_dir"] = fs::absolute(path).parent_path().string();
  m["artifacts"] = {fs::absolute(path).string(), fs::absolute(manifest).string()};
  m["K"] = s.K;
  m["T_total"] = s.T_total;
  m["activities"] = s.activities.size();
  write_file(fs::path(manifest.string() + ".tmp"), m.dump(2) + "\n");
  fs::rename(tmp, path);
  fs::rename(fs::path(manifest.string() + ".tmp"), manifest);
  out << "wrote " << path.string() << " (K=" << s.K << ", T_total=" << s.T_total << ", "
      << s.activities.size() << " activities)\n";
  return 0;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string scenario;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::vector<std::string> traces;
  int jobs = 1;
  bool dump_maps = false;
  std::string window = "test";
};

int cmd_run(const RunArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const Landscape s = load_scenario(a.scenario);
  ForagerConfig c = a.config.empty() ? ForagerConfig{} : load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  c.validate();
  bool trace_complexity = false, trace_gaze = false;
  for (const auto& t : a.traces) {
    if (t == "complexity") trace_complexity = true;
    else if (t == "gaze") trace_gaze = true;
    else throw UsageError("--trace accepts complexity and gaze, got '" + t + "'");
  }
  const TickWindow w = parse_window(a.window, s, c);
  if (w.begin < 0 || w.end > s.T_total || w.begin > w.end) throw UsageError("--window outside the scenario");
  const std::string out_dir = resolve_out_dir(a.output);

  Staging stage(out_dir);
  const PreattentiveTrace trace = compute_preattentive(s, c, w, a.jobs);
  RunOptions ro;
  ro.window = w;
  ro.jobs = a.jobs;
  ro.preattentive = &trace;
  if (a.dump_maps) ro.dump_dir = stage.path("maps");
  const Timeline tl = run(s, c, ro);

  emit_timeline(tl, stage.path("timeline.csv"));
  if (trace_complexity) stage.write("complexity.csv", complexity_trace_csv(trace));
  if (trace_gaze) stage.write("gaze.csv", gaze_trace_csv(tl));
  stage.write("config.json", config_to_json(c));

  ordered_json m = manifest_base("run", argv);
  m["scenario"] = fs::absolute(a.scenario).string();
  m["config"] = a.config.empty() ? ordered_json(nullptr) : ordered_json(fs::absolute(a.config).string());
  m["seed"] = c.seed;
  m["window"] = {{"begin", w.begin}, {"end", w.end}};
  m["jobs"] = a.jobs;
  m["output_dir"] = out_dir;
  auto artifacts = stage.artifacts();
  artifacts.push_back((fs::path(out_dir) / "manifest.json").string());
  m["artifacts"] = artifacts;
  stage.write("manifest.json", m.dump(2) + "\n");
  stage.commit();
  out << "timeline: " << tl.entries.size() << " ticks, " << tl.switch_count() << " switches -> " << out_dir << "\n";
  return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string scenario;
  std::string timeline;
  std::string output;
  std::string window;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Landscape s = load_scenario(a.scenario);
  const Timeline tl = load_timeline(a.timeline);
  std::optional<TickWindow> w;
  if (!a.window.empty()) w = parse_window(a.window, s, ForagerConfig{});
  const EvalReport r = evaluate(tl, s, w);
  const std::string text = report_json(r);
  if (a.output.empty()) {
    out << text;
  } else {
    const fs::path p(a.output);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_file(fs::path(p.string() + ".tmp"), text);
    fs::rename(fs::path(p.string() + ".tmp"), p);
    out << "A=" << format_double(r.A) << " avgA=" << format_double(r.avgA) << " switches=" << r.switch_count
        << " -> " << p.string() << "\n";
  }
  return 0;
}

// --- compare ---------------------------------------------------------------

struct CompareArgs {
  std::string scenario;
  std::string config;
  std::string strategies = "random,det,charnov,bayes";
  int seeds = 20;
  std::optional<std::uint64_t> first_seed;
  std::vector<int> bounds;
  int jobs = 1;
  bool no_tune = false;
  int tuning_seeds = 3;
  std::string output;
};

std::vector<StrategyKind> parse_strategies(const std::string& list) {
  std::vector<StrategyKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(strategy_kind_from_string(item));
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("--strategies is empty");
  return out;
}

int cmd_compare(const CompareArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const auto kinds = parse_strategies(a.strategies);
  if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
  if (a.tuning_seeds < 1) throw UsageError("--tuning-seeds must be >= 1");
  const Landscape s = load_scenario(a.scenario);
  const ForagerConfig base = a.config.empty() ? ForagerConfig{} : load_config(a.config);
  const std::string out_dir = resolve_out_dir(a.output);
  const auto seeds = seed_list(a.first_seed.value_or(base.seed), a.seeds);
  // Tuning seeds sit far from the evaluation seeds.
  const auto tuning = seed_list(seeds.back() + 1000, a.tuning_seeds);
  const std::vector<int> bounds = a.bounds.empty() ? std::vector<int>{280} : a.bounds;

  Staging stage(out_dir);
  ordered_json tables = ordered_json::array();
  for (int bound : bounds) {
    if (bound < 1) throw UsageError("--switch-bound must be >= 1");
    std::vector<NamedConfig> configs;
    for (StrategyKind kind : kinds) {
      ForagerConfig c = base;
      c.strategy.kind = kind;
      if (!a.no_tune) c.strategy = tune_strategy(s, c, bound, tuning, a.jobs).best;
      configs.push_back({std::string(to_string(kind)), c});
    }
    CompareOptions co;
    co.jobs = a.jobs;
    const ComparisonTable table = compare_strategies(s, configs, seeds, bound, co);
    const std::string tag = std::to_string(bound);
    stage.write("compare_" + tag + ".json", comparison_json(table));
    stage.write("table_" + tag + ".csv", comparison_csv(table));
    out << "# switch bound < " << bound << "\n" << comparison_csv(table);
    tables.push_back(tag);
  }

  ordered_json m = manifest_base("compare", argv);
  m["scenario"] = fs::absolute(a.scenario).string();
  m["config"] = a.config.empty() ? ordered_json(nullptr) : ordered_json(fs::absolute(a.config).string());
  m["seeds"] = seeds;
  m["tuning_seeds"] = a.no_tune ? ordered_json::array() : ordered_json(tuning);
  m["switch_bounds"] = bounds;
  m["jobs"] = a.jobs;
  m["output_dir"] = out_dir;
  stage.write("config.json", config_to_json(base));
  auto artifacts = stage.artifacts();
  artifacts.push_back((fs::path(out_dir) / "manifest.json").string());
  m["artifacts"] = artifacts;
  stage.write("manifest.json", m.dump(2) + "\n");
  stage.commit();
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian foraging simulator for multi-stream monitoring", "forager"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scenario from a preset");
  gen_cmd->add_option("--preset", gen.preset, "Preset name (ucr-like, sparse, crowded)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("-o,--output", gen.output, "Scenario file to write")->required();

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate the forager on a scenario");
  run_cmd->add_option("-s,--scenario", run_args.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-c,--config", run_args.config, "Config file (JSON)")->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run_args.seed, "Override the config seed");
  run_cmd->add_option("-o,--output", run_args.output, std::string("Output directory (default $") + kOutDirEnv + ")");
  run_cmd->add_option("--trace", run_args.traces, "Extra traces: complexity, gaze")->delimiter(',');
  run_cmd->add_option("--jobs", run_args.jobs, "Threads for the preattentive loop")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--dump-maps", run_args.dump_maps, "Write attentive priority maps and protos per tick");
  run_cmd->add_option("--window", run_args.window, "test, setup, all or BEGIN:END")->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score a timeline against scenario ground truth");
  eval_cmd->add_option("-s,--scenario", eval_args.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-t,--timeline", eval_args.timeline, "Timeline CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-o,--output", eval_args.output, "Report file (default stdout)");
  eval_cmd->add_option("--window", eval_args.window, "test, setup, all or BEGIN:END (default: timeline span)");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare giving-up strategies over seeds");
  cmp_cmd->add_option("-s,--scenario", cmp.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("-c,--config", cmp.config, "Base config file (JSON)")->check(CLI::ExistingFile);
  cmp_cmd->add_option("--strategies", cmp.strategies, "Comma-separated kinds")->capture_default_str();
  cmp_cmd->add_option("--seeds", cmp.seeds, "Number of evaluation seeds")->capture_default_str();
  cmp_cmd->add_option("--first-seed", cmp.first_seed, "First evaluation seed (default: config seed)");
  cmp_cmd->add_option("--switch-bound", cmp.bounds, "Switch bound; repeat for several tables (default 280)");
  cmp_cmd->add_option("--jobs", cmp.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmp_cmd->add_flag("--no-tune", cmp.no_tune, "Use the config's strategy parameters as given");
  cmp_cmd->add_option("--tuning-seeds", cmp.tuning_seeds, "Seeds used for setup-window tuning")->capture_default_str();
  cmp_cmd->add_option("-o,--output", cmp.output, std::string("Output directory (default $") + kOutDirEnv + ")");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, args, out);
    if (*run_cmd) return cmd_run(run_args, args, out);
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*cmp_cmd) return cmd_compare(cmp, args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace forager
