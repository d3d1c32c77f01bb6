// src/eval.cpp

#include "forager/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "forager/error.hpp"

namespace forager {

using nlohmann::ordered_json;

AccuracySummary accuracy_from_counts(std::span<const long> TP, std::span<const long> NP) {
  if (TP.size() != NP.size()) throw DomainError("accuracy: TP and NP lengths differ");
  AccuracySummary out;
  long tp_sum = 0, np_sum = 0;
  double a_sum = 0.0;
  int included = 0;
  for (std::size_t e = 0; e < TP.size(); ++e) {
    if (TP[e] < 0 || NP[e] < 0 || TP[e] > NP[e]) throw DomainError("accuracy: need 0 <= TP_e <= NP_e");
    tp_sum += TP[e];
    np_sum += NP[e];
    const bool inc = NP[e] > 0;
    const double a = inc ? static_cast<double>(TP[e]) / static_cast<double>(NP[e]) : 0.0;
    out.A_e.push_back(a);
    out.included.push_back(inc);
    if (inc) {
      a_sum += a;
      ++included;
    }
  }
  out.A = np_sum > 0 ? static_cast<double>(tp_sum) / static_cast<double>(np_sum) : 0.0;
  out.avgA = included > 0 ? a_sum / included : 0.0;
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double eps) {
  if (p.size() != q.size()) throw DomainError("kl: distribution lengths differ");
  if (p.empty()) return 0.0;
  const double n = static_cast<double>(p.size());
  const double ps = std::accumulate(p.begin(), p.end(), 0.0) + eps * n;
  const double qs = std::accumulate(q.begin(), q.end(), 0.0) + eps * n;
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = (p[i] + eps) / ps;
    const double qi = (q[i] + eps) / qs;
    kl += pi * std::log(pi / qi);
  }
  return std::max(kl, 0.0);
}

EvalReport evaluate(const Timeline& tl, const Landscape& s, std::optional<TickWindow> window) {
  EvalReport r;
  if (window) {
    r.window = *window;
  } else if (tl.entries.empty()) {
    r.window = {0, 0};
  } else {
    int lo = tl.entries.front().tick, hi = lo;
    for (const auto& e : tl.entries) {
      lo = std::min(lo, e.tick);
      hi = std::max(hi, e.tick);
    }
    r.window = {lo, hi + 1};
  }
  const TickWindow w = r.window;
  if (w.begin < 0 || w.end > s.T_total || w.begin > w.end) throw DomainError("evaluation window outside the landscape");

  const int E = s.label_count();
  const int L = w.length();
  const ActivityIndex index(s);

  // presence[e][t]: activity e shows on some stream at tick t.
  std::vector<std::vector<char>> presence(static_cast<std::size_t>(E), std::vector<char>(static_cast<std::size_t>(L), 0));
  for (const auto& a : s.activities)
    for (int t = std::max(a.t_start, w.begin); t < std::min(a.t_end, w.end); ++t)
      presence[static_cast<std::size_t>(a.label)][static_cast<std::size_t>(t - w.begin)] = 1;

  std::vector<long> NP(static_cast<std::size_t>(E), 0), TP(static_cast<std::size_t>(E), 0);
  for (int e = 0; e < E; ++e)
    NP[static_cast<std::size_t>(e)] = std::count(presence[static_cast<std::size_t>(e)].begin(),
                                                 presence[static_cast<std::size_t>(e)].end(), 1);

  std::vector<double> out_counts(static_cast<std::size_t>(s.K) * static_cast<std::size_t>(std::max(E, 0)), 0.0);
  std::vector<char> seen_tick(static_cast<std::size_t>(L), 0);
  std::vector<char> label_seen(static_cast<std::size_t>(E), 0);
  for (const auto& entry : tl.entries) {
    if (entry.tick < w.begin || entry.tick >= w.end) continue;
    auto& seen = seen_tick[static_cast<std::size_t>(entry.tick - w.begin)];
    if (seen) throw DomainError("timeline has two entries for tick " + std::to_string(entry.tick));
    seen = 1;
    if (entry.travel()) continue;
    if (entry.stream < 0 || entry.stream >= s.K) throw DomainError("timeline stream index out of range");
    std::fill(label_seen.begin(), label_seen.end(), 0);
    for (int ai : index.active(entry.stream, entry.tick)) {
      const int e = s.activities[static_cast<std::size_t>(ai)].label;
      if (label_seen[static_cast<std::size_t>(e)]) continue;
      label_seen[static_cast<std::size_t>(e)] = 1;
      ++TP[static_cast<std::size_t>(e)];
      out_counts[static_cast<std::size_t>(entry.stream) * static_cast<std::size_t>(E) + static_cast<std::size_t>(e)] += 1.0;
    }
  }
  if (std::count(seen_tick.begin(), seen_tick.end(), 0) > 0)
    r.warnings.push_back("timeline does not cover every tick of the evaluation window");

  const AccuracySummary acc = accuracy_from_counts(TP, NP);
  r.A = acc.A;
  r.avgA = acc.avgA;
  for (int e = 0; e < E; ++e) {
    const auto ue = static_cast<std::size_t>(e);
    r.per_activity.push_back({e, TP[ue], NP[ue], acc.A_e[ue], acc.included[ue]});
    if (!acc.included[ue])
      r.warnings.push_back("activity " + std::to_string(e) + " never occurs in the window; excluded from avgA");
  }
  r.switch_count = static_cast<std::size_t>(std::count_if(
      tl.switches.begin(), tl.switches.end(), [&](const Switch& sw) { return sw.tick >= w.begin && sw.tick < w.end; }));

  std::vector<double> p_in(static_cast<std::size_t>(E), 0.0), p_out(static_cast<std::size_t>(E), 0.0);
  bool any_truth = std::accumulate(NP.begin(), NP.end(), 0L) > 0;
  if (any_truth) p_in = activity_joint(s, w).p_activity;
  if (std::accumulate(out_counts.begin(), out_counts.end(), 0.0) > 0.0) {
    r.joint_out = joint_from_counts(s.K, E, out_counts);
    p_out = r.joint_out->p_activity;
  } else {
    r.warnings.push_back("no attended frame shows an activity; output joint undefined");
  }
  r.kl_activity = any_truth ? kl_divergence(p_in, p_out) : 0.0;
  return r;
}

namespace {

ordered_json joint_json(const JointDistribution& j) {
  ordered_json out;
  out["K"] = j.K;
  out["E"] = j.E;
  ordered_json rows = ordered_json::array();
  for (int k = 0; k < j.K; ++k) {
    ordered_json row = ordered_json::array();
    for (int e = 0; e < j.E; ++e) row.push_back(j.at(k, e));
    rows.push_back(row);
  }
  out["p"] = rows;
  out["p_stream"] = j.p_stream;
  out["p_activity"] = j.p_activity;
  return out;
}

}  // namespace

std::string report_json(const EvalReport& r, int indent) {
  ordered_json j;
  j["A"] = r.A;
  j["avgA"] = r.avgA;
  j["window"] = {{"begin", r.window.begin}, {"end", r.window.end}};
  ordered_json acts = ordered_json::array();
  for (const auto& a : r.per_activity)
    acts.push_back({{"label", a.label}, {"TP", a.TP}, {"NP", a.NP}, {"A", a.A}, {"included", a.included}});
  j["per_activity"] = acts;
  j["joint_out"] = r.joint_out ? joint_json(*r.joint_out) : ordered_json(nullptr);
  j["switch_count"] = r.switch_count;
  j["kl_activity"] = r.kl_activity;
  j["warnings"] = r.warnings;
  return j.dump(indent) + "\n";
}

// ---------------------------------------------------------------------------

MeanSd mean_sd(std::span<const double> v) {
  MeanSd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

namespace {

// Everything the preattentive trace depends on, besides the landscape and window.
bool same_perception(const ForagerConfig& a, const ForagerConfig& b) {
  return a.N_P_max == b.N_P_max && a.N_s == b.N_s && a.cell_grid.rows == b.cell_grid.rows &&
         a.cell_grid.cols == b.cell_grid.cols && a.sensor.floor == b.sensor.floor && a.sensor.noise == b.sensor.noise &&
         a.sensor.amplitude == b.sensor.amplitude && a.sensor.miss_rate == b.sensor.miss_rate &&
         a.sensor.false_alarm_rate == b.sensor.false_alarm_rate &&
         a.sensor.false_alarm_extent == b.sensor.false_alarm_extent && a.seed == b.seed;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(int n, int jobs, F&& fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct RunCell {
  std::size_t config = 0;
  std::size_t seed = 0;
  std::size_t trace = 0;
};

}  // namespace

ComparisonTable compare_strategies(const Landscape& s, std::span<const NamedConfig> configs,
                                   std::span<const std::uint64_t> seeds, int switch_bound,
                                   const CompareOptions& options) {
  if (configs.empty()) throw ConfigError("compare: at least one config is required");
  if (seeds.empty()) throw ConfigError("compare: at least one seed is required");
  if (switch_bound < 1) throw ConfigError("compare: switch bound must be >= 1");
  for (const auto& c : configs) c.config.validate();

  ComparisonTable table;
  table.switch_bound = switch_bound;
  table.window = options.window.value_or(test_window(s, configs.front().config));

  // Preattentive traces are shared by configs that only differ in strategy.
  std::vector<ForagerConfig> trace_configs;
  std::vector<RunCell> cells;
  for (std::size_t si = 0; si < seeds.size(); ++si)
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
      ForagerConfig c = configs[ci].config;
      c.seed = seeds[si];
      std::size_t ti = 0;
      while (ti < trace_configs.size() && !same_perception(trace_configs[ti], c)) ++ti;
      if (ti == trace_configs.size()) trace_configs.push_back(c);
      cells.push_back({ci, si, ti});
    }

  std::vector<PreattentiveTrace> traces(trace_configs.size());
  parallel_for(static_cast<int>(traces.size()), options.jobs, [&](int i) {
    traces[static_cast<std::size_t>(i)] = compute_preattentive(s, trace_configs[static_cast<std::size_t>(i)], table.window);
  });

  std::vector<RunResult> results(cells.size());
  parallel_for(static_cast<int>(cells.size()), options.jobs, [&](int i) {
    const RunCell& cell = cells[static_cast<std::size_t>(i)];
    ForagerConfig c = configs[cell.config].config;
    c.seed = seeds[cell.seed];
    RunOptions ro;
    ro.window = table.window;
    ro.preattentive = &traces[cell.trace];
    const Timeline tl = run(s, c, ro);
    const EvalReport rep = evaluate(tl, s, table.window);
    RunResult& out = results[static_cast<std::size_t>(i)];
    out.name = configs[cell.config].name;
    out.seed = c.seed;
    out.A = rep.A;
    out.avgA = rep.avgA;
    out.switch_count = rep.switch_count;
    out.kl_activity = rep.kl_activity;
    out.excluded = static_cast<long>(rep.switch_count) >= switch_bound;
  });

  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    ComparisonRow row;
    row.name = configs[ci].name;
    row.strategy = configs[ci].config.strategy;
    std::vector<double> a, avg, sw, kl;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].config != ci) continue;
      const RunResult& rr = results[i];
      row.per_seed.push_back(rr);
      a.push_back(rr.A);
      avg.push_back(rr.avgA);
      sw.push_back(static_cast<double>(rr.switch_count));
      kl.push_back(rr.kl_activity);
      row.excluded_runs += rr.excluded ? 1 : 0;
      ++row.runs;
    }
    row.A = mean_sd(a);
    row.avgA = mean_sd(avg);
    row.switches = mean_sd(sw);
    row.kl = mean_sd(kl);
    row.excluded = row.excluded_runs > 0;
    table.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    if (!table.rows[i].excluded) table.ranking.push_back(i);
  std::stable_sort(table.ranking.begin(), table.ranking.end(),
                   [&](std::size_t x, std::size_t y) { return table.rows[x].A.mean > table.rows[y].A.mean; });
  return table;
}

std::vector<StrategyConfig> tuning_grid(const StrategyConfig& base) {
  std::vector<StrategyConfig> out;
  auto with = [&](auto setter) {
    StrategyConfig c = base;
    setter(c);
    out.push_back(c);
  };
  switch (base.kind) {
    case StrategyKind::bayesian:
      for (double nu0 : {0.5, 1.0, 2.0})
        for (double d0 : {1e2, 1e3, 1e4, 1e5, 1e6, 1e7})
          with([&](StrategyConfig& c) {
            c.nu0 = nu0;
            c.Delta0 = d0;
          });
      break;
    case StrategyKind::deterministic:
      for (double d : {5.0, 10.0, 25.0, 50.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 800.0, 1000.0})
        with([&](StrategyConfig& c) { c.dwell = d; });
      break;
    case StrategyKind::random:
      for (double b : {10.0, 20.0, 50.0, 100.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0, 1600.0, 2000.0})
        with([&](StrategyConfig& c) { c.max_dwell = b; });
      break;
    case StrategyKind::charnov:
      for (double e = -1.0; e >= -9.0; e -= 0.5)
        with([&](StrategyConfig& c) { c.charnov_slope = std::pow(10.0, e); });
      break;
  }
  return out;
}

std::string_view to_string(TuneObjective o) {
  switch (o) {
    case TuneObjective::accuracy: return "accuracy";
    case TuneObjective::avg_accuracy: return "avg_accuracy";
    case TuneObjective::mean: return "mean";
  }
  return "";
}

TuneObjective tune_objective_from_string(std::string_view name) {
  if (name == "accuracy") return TuneObjective::accuracy;
  if (name == "avg_accuracy") return TuneObjective::avg_accuracy;
  if (name == "mean") return TuneObjective::mean;
  throw ConfigError("unknown tuning objective '" + std::string(name) + "' (valid: accuracy, avg_accuracy, mean)");
}

TuningResult tune_strategy(const Landscape& s, const ForagerConfig& base, int switch_bound,
                           std::span<const std::uint64_t> tuning_seeds, int jobs, TuneObjective objective) {
  if (tuning_seeds.empty()) throw ConfigError("tuning: at least one seed is required");
  base.validate();
  const TickWindow setup = setup_window(s, base);
  const TickWindow test = test_window(s, base);
  // The bound refers to the test window; scale it to the setup window length.
  const double bound = static_cast<double>(switch_bound) * setup.length() / std::max(test.length(), 1);

  const auto grid = tuning_grid(base.strategy);
  std::vector<PreattentiveTrace> traces(tuning_seeds.size());
  parallel_for(static_cast<int>(traces.size()), jobs, [&](int i) {
    ForagerConfig c = base;
    c.seed = tuning_seeds[static_cast<std::size_t>(i)];
    traces[static_cast<std::size_t>(i)] = compute_preattentive(s, c, setup);
  });

  const std::size_t n = grid.size() * tuning_seeds.size();
  std::vector<double> acc(n), sw(n);
  parallel_for(static_cast<int>(n), jobs, [&](int i) {
    const std::size_t gi = static_cast<std::size_t>(i) / tuning_seeds.size();
    const std::size_t si = static_cast<std::size_t>(i) % tuning_seeds.size();
    ForagerConfig c = base;
    c.strategy = grid[gi];
    c.seed = tuning_seeds[si];
    RunOptions ro;
    ro.window = setup;
    ro.preattentive = &traces[si];
    const Timeline tl = run(s, c, ro);
    const EvalReport rep = evaluate(tl, s, setup);
    const double score = objective == TuneObjective::accuracy       ? rep.A
                         : objective == TuneObjective::avg_accuracy ? rep.avgA
                                                                    : 0.5 * (rep.A + rep.avgA);
    acc[static_cast<std::size_t>(i)] = score;
    sw[static_cast<std::size_t>(i)] = static_cast<double>(rep.switch_count);
  });

  TuningResult best;
  bool have = false;
  double fewest = 0.0;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double a = 0.0, m = 0.0;
    for (std::size_t si = 0; si < tuning_seeds.size(); ++si) {
      a += acc[gi * tuning_seeds.size() + si];
      m += sw[gi * tuning_seeds.size() + si];
    }
    a /= static_cast<double>(tuning_seeds.size());
    m /= static_cast<double>(tuning_seeds.size());
    const bool ok = m < bound;
    if (ok && (!best.within_bound || a > best.score)) {
      best = {grid[gi], a, m, true};
      have = true;
    } else if (!best.within_bound && (!have || m < fewest)) {
      best = {grid[gi], a, m, false};
      fewest = m;
      have = true;
    }
  }
  return best;
}

std::string comparison_json(const ComparisonTable& t, int indent) {
  ordered_json j;
  j["switch_bound"] = t.switch_bound;
  j["window"] = {{"begin", t.window.begin}, {"end", t.window.end}};
  auto ms = [](const MeanSd& m) { return ordered_json{{"mean", m.mean}, {"sd", m.sd}}; };
  ordered_json rows = ordered_json::array();
  for (const auto& r : t.rows) {
    ordered_json row;
    row["name"] = r.name;
    row["strategy"] = {{"kind", std::string(to_string(r.strategy.kind))},
                       {"nu0", r.strategy.nu0},
                       {"Delta0", r.strategy.Delta0},
                       {"charnov_slope", r.strategy.charnov_slope},
                       {"travel_time", r.strategy.travel_time},
                       {"dwell", r.strategy.dwell},
                       {"max_dwell", r.strategy.max_dwell}};
    row["accuracy"] = ms(r.A);
    row["avg_accuracy"] = ms(r.avgA);
    row["switches"] = ms(r.switches);
    row["kl_activity"] = ms(r.kl);
    row["runs"] = r.runs;
    row["excluded_runs"] = r.excluded_runs;
    row["excluded"] = r.excluded;
    ordered_json per = ordered_json::array();
    for (const auto& p : r.per_seed)
      per.push_back({{"seed", p.seed},
                     {"A", p.A},
                     {"avgA", p.avgA},
                     {"switch_count", p.switch_count},
                     {"kl_activity", p.kl_activity},
                     {"excluded", p.excluded}});
    row["per_seed"] = per;
    rows.push_back(row);
  }
  j["rows"] = rows;
  ordered_json ranking = ordered_json::array();
  for (auto i : t.ranking) ranking.push_back(t.rows[i].name);
  j["ranking"] = ranking;
  return j.dump(indent) + "\n";
}

std::string comparison_csv(const ComparisonTable& t) {
  std::ostringstream out;
  out << "measure";
  for (const auto& r : t.rows) out << ',' << r.name;
  out << '\n';
  auto line = [&](const char* name, auto get) {
    out << name;
    for (const auto& r : t.rows) out << ',' << format_double(get(r));
    out << '\n';
  };
  line("accuracy", [](const ComparisonRow& r) { return 100.0 * r.A.mean; });
  line("avg_accuracy", [](const ComparisonRow& r) { return 100.0 * r.avgA.mean; });
  line("accuracy_sd", [](const ComparisonRow& r) { return 100.0 * r.A.sd; });
  line("avg_accuracy_sd", [](const ComparisonRow& r) { return 100.0 * r.avgA.sd; });
  line("switches", [](const ComparisonRow& r) { return r.switches.mean; });
  line("excluded_runs", [](const ComparisonRow& r) { return static_cast<double>(r.excluded_runs); });
  return out.str();
}

}  // namespace forager
