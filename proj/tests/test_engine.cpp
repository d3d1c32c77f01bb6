#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "forager/engine.hpp"
#include "forager/error.hpp"

using namespace forager;
namespace fs = std::filesystem;

namespace {

Landscape small_landscape(int K, int T, int activities, std::uint64_t seed) {
  ScenarioConfig sc;
  sc.K = K;
  sc.T_total = T;
  sc.activity_count = activities;
  sc.class_rates = {0.5, 0.3, 0.2};
  sc.mean_duration = T / 5.0;
  return generate_scenario(sc, seed);
}

ForagerConfig deterministic_config(double dwell) {
  ForagerConfig c;
  c.strategy.kind = StrategyKind::deterministic;
  c.strategy.dwell = dwell;
  return c;
}

void check_timeline_invariants(const Timeline& tl, TickWindow w, int K) {
  REQUIRE(static_cast<int>(tl.entries.size()) == w.length());
  std::size_t sw = 0;
  int leaves = 0;
  for (std::size_t i = 0; i < tl.entries.size(); ++i) {
    const auto& e = tl.entries[i];
    REQUIRE(e.tick == w.begin + static_cast<int>(i));
    REQUIRE(e.stream >= 0);
    REQUIRE(e.stream < K);
    if (e.switched) {
      REQUIRE(e.travel());
      REQUIRE(sw < tl.switches.size());
      REQUIRE(tl.switches[sw].tick == e.tick);
      REQUIRE(tl.switches[sw].to == e.stream);
      REQUIRE(tl.switches[sw].from == tl.entries[i - 1].stream);
      ++sw;
    }
    if (e.leave_reason != LeaveReason::none) ++leaves;
    if (i > 0 && !e.travel()) REQUIRE(e.stream == tl.entries[i - 1].stream);
  }
  REQUIRE(sw == tl.switches.size());
  REQUIRE(static_cast<std::size_t>(leaves) == tl.switch_count());
  REQUIRE(tl.entries.empty() == false);
  REQUIRE(tl.entries.front().travel());
}

}  // namespace

TEST_CASE("a single stream is attended on every non-travel tick") {
  const Landscape s = small_landscape(1, 300, 3, 4);
  for (auto kind : {StrategyKind::bayesian, StrategyKind::deterministic, StrategyKind::random, StrategyKind::charnov}) {
    ForagerConfig c;
    c.strategy.kind = kind;
    c.strategy.dwell = 20;
    c.strategy.max_dwell = 40;
    const Timeline tl = run(s, c);
    check_timeline_invariants(tl, {0, 300}, 1);
    for (const auto& e : tl.entries) REQUIRE(e.stream == 0);
  }
}

TEST_CASE("deterministic dwell cycle sets the switch count") {
  const Landscape s = small_landscape(2, 1000, 6, 9);
  const Timeline tl = run(s, deterministic_config(100));
  check_timeline_invariants(tl, {0, 1000}, 2);
  const int expected = 1000 / 101;
  REQUIRE(std::abs(static_cast<int>(tl.switch_count()) - expected) <= 1);
  for (const auto& sw : tl.switches) REQUIRE((sw.tick % 101) == 0);
}

TEST_CASE("runs are deterministic and independent of the job count") {
  const Landscape s = small_landscape(4, 400, 8, 12);
  ForagerConfig c;
  c.seed = 31;
  c.sensor.noise = 0.05;
  c.sensor.false_alarm_rate = 0.1;
  const std::string a = timeline_csv(run(s, c, {std::nullopt, 1}));
  const std::string b = timeline_csv(run(s, c, {std::nullopt, 1}));
  const std::string d = timeline_csv(run(s, c, {std::nullopt, 8}));
  REQUIRE(a == b);
  REQUIRE(a == d);
  c.seed = 32;
  REQUIRE(timeline_csv(run(s, c)) != a);

  const TickWindow w{0, 400};
  const auto t1 = compute_preattentive(s, c, w, 1);
  const auto t3 = compute_preattentive(s, c, w, 3);
  REQUIRE(t1.data.size() == 400u * 4u);
  for (std::size_t i = 0; i < t1.data.size(); ++i) REQUIRE(t1.data[i].C == t3.data[i].C);
}

TEST_CASE("cached preattentive trace gives the same run") {
  const Landscape s = small_landscape(3, 300, 6, 2);
  ForagerConfig c;
  const TickWindow w{100, 300};
  const auto trace = compute_preattentive(s, c, w);
  RunOptions with{w, 1, &trace, std::nullopt};
  RunOptions without{w, 1, nullptr, std::nullopt};
  const Timeline tl = run(s, c, with);
  REQUIRE(tl == run(s, c, without));
  check_timeline_invariants(tl, w, 3);
  RunOptions wrong{TickWindow{0, 300}, 1, &trace, std::nullopt};
  REQUIRE_THROWS_AS(run(s, c, wrong), ConfigError);
  REQUIRE_THROWS_AS(run(s, c, {TickWindow{0, 301}}), ConfigError);
}

TEST_CASE("preattentive complexity covers every stream and stays in range") {
  const Landscape s = small_landscape(3, 200, 6, 5);
  const auto trace = compute_preattentive(s, ForagerConfig{}, {0, 200});
  const ActivityIndex index(s);
  for (int t = 0; t < 200; ++t) {
    for (int k = 0; k < 3; ++k) {
      const auto& ci = trace.at(t, k);
      REQUIRE(ci.stream == k);
      REQUIRE(ci.tick == t);
      REQUIRE(ci.C >= 0.0);
      REQUIRE(ci.C <= 0.25);
      if (index.active(k, t).empty()) REQUIRE(ci.C == 0.0);
    }
  }
}

TEST_CASE("an empty landscape still cycles streams") {
  Landscape s;
  s.K = 3;
  s.T_total = 250;
  const Timeline det = run(s, deterministic_config(40));
  check_timeline_invariants(det, {0, 250}, 3);
  REQUIRE(det.switch_count() == 249 / 41);
  for (const auto& e : det.entries) REQUIRE(!e.hit);
  const Timeline bayes = run(s, ForagerConfig{});
  check_timeline_invariants(bayes, {0, 250}, 3);
}

TEST_CASE("Bayesian forager favours the busy stream") {
  Landscape s;
  s.K = 3;
  s.T_total = 600;
  Activity a;
  a.label = 0;
  a.stream = 1;
  a.t_start = 0;
  a.t_end = 600;
  ObjectTrack o{ObjectKind::face, 3.0, {}};
  for (int t = 0; t < 600; ++t) o.positions.push_back({20 + (t / 20) % 20, 24});
  a.objects = {o};
  s.activities = {a};
  const Timeline tl = run(s, ForagerConfig{});
  check_timeline_invariants(tl, {0, 600}, 3);
  int on_busy = 0, hits = 0;
  for (const auto& e : tl.entries) {
    on_busy += e.stream == 1;
    hits += e.hit;
  }
  REQUIRE(on_busy > 550);
  REQUIRE(hits > 400);
}

TEST_CASE("timeline CSV") {
  REQUIRE(timeline_csv(Timeline{}) == "tick,stream,foa_x,foa_y,regime,hit,switch_flag,leave_reason\n");
  REQUIRE(parse_timeline_csv(timeline_csv(Timeline{})) == Timeline{});

  const Landscape s = small_landscape(3, 1200, 6, 8);
  ForagerConfig c = deterministic_config(50);
  const TickWindow w = test_window(s, c);
  REQUIRE(w.begin == 1000);
  REQUIRE(w.end == 1200);
  REQUIRE(setup_window(s, c).end == 1000);
  const Timeline tl = run(s, c, {w});
  const std::string csv = timeline_csv(tl);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 201);
  REQUIRE(parse_timeline_csv(csv) == tl);

  const fs::path dir = fs::temp_directory_path() / "forager_engine_test";
  fs::create_directories(dir);
  emit_timeline(tl, dir / "tl.csv");
  REQUIRE(load_timeline(dir / "tl.csv") == tl);
  REQUIRE_THROWS_WITH(emit_timeline(tl, dir / "missing" / "tl.csv"), Catch::Matchers::ContainsSubstring("missing"));
  fs::remove_all(dir);

  c.setup_ticks = 0;
  REQUIRE(test_window(s, c).begin == 0);
  c.setup_ticks = 5000;
  REQUIRE(test_window(s, c).end == 1200);
}

TEST_CASE("malformed timeline CSV names the line and field") {
  const std::string header = "tick,stream,foa_x,foa_y,regime,hit,switch_flag,leave_reason\n";
  auto message = [](const std::string& text) {
    try {
      parse_timeline_csv(text);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  REQUIRE(message("tick,stream\n").find("header") != std::string::npos);
  const std::string bad_stream = message(header + "0,x,32,24,travel,0,0,\n");
  REQUIRE(bad_stream.find("line 2") != std::string::npos);
  REQUIRE(bad_stream.find("stream") != std::string::npos);
  REQUIRE(message(header + "0,0,32,24,dance,0,0,\n").find("regime") != std::string::npos);
  REQUIRE(message(header + "0,0,32,24,travel,0,0\n").find("line 2") != std::string::npos);
}

TEST_CASE("trace CSVs") {
  const Landscape s = small_landscape(2, 100, 3, 3);
  const ForagerConfig c;
  const auto trace = compute_preattentive(s, c, {0, 100});
  const std::string ctrace = complexity_trace_csv(trace);
  REQUIRE(ctrace.rfind("tick,stream,H,delta,omega,C\n", 0) == 0);
  REQUIRE(std::count(ctrace.begin(), ctrace.end(), '\n') == 201);

  const Timeline tl = run(s, c, {std::nullopt, 1, &trace, std::nullopt});
  const std::string g = gaze_trace_csv(tl);
  REQUIRE(g.rfind("tick,stream,foa_x,foa_y,regime,hit\n", 0) == 0);
  const auto attentive = std::count_if(tl.entries.begin(), tl.entries.end(), [](const auto& e) { return !e.travel(); });
  REQUIRE(std::count(g.begin(), g.end(), '\n') == attentive + 1);
}

TEST_CASE("map dumps") {
  const Landscape s = small_landscape(2, 30, 2, 3);
  const fs::path dir = fs::temp_directory_path() / "forager_dump_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Timeline tl = run(s, ForagerConfig{}, {std::nullopt, 1, nullptr, dir});
  int attentive = 0;
  for (const auto& e : tl.entries) {
    if (e.travel()) continue;
    ++attentive;
    REQUIRE(fs::exists(dir / ("map_" + std::to_string(e.tick) + ".csv")));
    REQUIRE(fs::exists(dir / ("protos_" + std::to_string(e.tick) + ".csv")));
  }
  REQUIRE(attentive > 0);
  std::ifstream in(dir / ("map_" + std::to_string(tl.entries[1].tick) + ".csv"));
  std::string first;
  std::getline(in, first);
  REQUIRE(std::count(first.begin(), first.end(), ',') == s.width - 1);
  fs::remove_all(dir);
}

TEST_CASE("config validation names the field") {
  auto message = [](ForagerConfig c) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  REQUIRE(message(ForagerConfig{}).empty());
  ForagerConfig c;
  c.task_prior = {0.7, 0.7};
  REQUIRE(message(c).find("task_prior") != std::string::npos);
  c = {};
  c.N_s = 0;
  REQUIRE(message(c).find("N_s") != std::string::npos);
  c = {};
  c.detector_accuracy = 1.2;
  REQUIRE(message(c).find("detector_accuracy") != std::string::npos);
  c = {};
  c.strategy.dwell = -3;
  REQUIRE(message(c).find("dwell") != std::string::npos);
  c = {};
  c.stable_params.saccade.alpha = 3;
  REQUIRE(message(c).find("stable_params") != std::string::npos);
}
