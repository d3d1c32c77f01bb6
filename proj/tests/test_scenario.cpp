#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "forager/error.hpp"
#include "forager/scenario.hpp"

using namespace forager;
using Catch::Matchers::ContainsSubstring;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.K = 3;
  c.T_total = 600;
  c.activity_count = 6;
  c.mean_duration = 100;
  c.class_rates = {1.0, 1.0};
  return c;
}

Activity simple_activity(int label, int stream, int t0, int t1) {
  Activity a;
  a.label = label;
  a.stream = stream;
  a.t_start = t0;
  a.t_end = t1;
  ObjectTrack o;
  o.kind = ObjectKind::face;
  o.extent = 2.0;
  o.positions.assign(static_cast<std::size_t>(t1 - t0), Cell{10, 10});
  a.objects.push_back(o);
  return a;
}

Landscape empty_landscape(int K = 8, int T = 1000) {
  Landscape s;
  s.K = K;
  s.width = 64;
  s.height = 48;
  s.T_total = T;
  return s;
}

}  // namespace

TEST_CASE("degenerate rate vector puts every activity in one class") {
  ScenarioConfig c = small_config();
  c.class_rates = {0.0, 0.0, 1.0};
  c.activity_count = 30;
  const Landscape s = generate_scenario(c, 5);
  REQUIRE(s.activities.size() == 30);
  for (const auto& a : s.activities) REQUIRE(a.label == 2);
}

TEST_CASE("generation is a pure function of config and seed") {
  const ScenarioConfig c = scenario_preset("ucr-like");
  const Landscape a = generate_scenario(c, 3);
  const Landscape b = generate_scenario(c, 3);
  REQUIRE(a.K == 8);
  REQUIRE(a.T_total == 8000);
  REQUIRE(serialize_scenario(a) == serialize_scenario(b));
  REQUIRE(serialize_scenario(a) != serialize_scenario(generate_scenario(c, 4)));
}

TEST_CASE("class frequencies follow the configured rates") {
  ScenarioConfig c = small_config();
  c.class_rates = {0.4, 0.3, 0.1, 0.1, 0.05, 0.05};
  c.activity_count = 500;
  const Landscape s = generate_scenario(c, 17);
  std::vector<int> count(c.class_rates.size(), 0);
  for (const auto& a : s.activities) ++count[static_cast<std::size_t>(a.label)];
  for (std::size_t e = 0; e < count.size(); ++e)
    REQUIRE(std::abs(count[e] / 500.0 - c.class_rates[e]) <= 0.05);
}

TEST_CASE("generated landscapes satisfy every invariant") {
  for (const auto& name : scenario_preset_names()) {
    const Landscape s = generate_scenario(scenario_preset(name), 1);
    REQUIRE_NOTHROW(validate(s));
    for (const auto& a : s.activities) {
      REQUIRE(a.t_start < a.t_end);
      REQUIRE(a.t_end <= s.T_total);
      for (const auto& o : a.objects) {
        REQUIRE(o.extent > 0.0);
        REQUIRE(static_cast<int>(o.positions.size()) == a.duration());
        for (const auto& p : o.positions) {
          REQUIRE(p.x >= 0);
          REQUIRE(p.x < s.width);
          REQUIRE(p.y >= 0);
          REQUIRE(p.y < s.height);
        }
      }
    }
  }
}

TEST_CASE("invalid scenario configs are rejected") {
  ScenarioConfig c = small_config();
  c.class_rates = {};
  REQUIRE_THROWS_AS(generate_scenario(c, 1), ConfigError);
  c = small_config();
  c.class_rates = {0.0, 0.0};
  REQUIRE_THROWS_AS(generate_scenario(c, 1), ConfigError);
  c = small_config();
  c.mean_duration = 0;
  REQUIRE_THROWS_AS(generate_scenario(c, 1), ConfigError);
  c = small_config();
  c.K = 0;
  REQUIRE_THROWS_AS(generate_scenario(c, 1), ConfigError);
  REQUIRE_THROWS_AS(scenario_preset("nope"), ConfigError);
}

TEST_CASE("save then load is the identity") {
  const Landscape s = generate_scenario(small_config(), 8);
  const auto path = std::filesystem::temp_directory_path() / "forager_scenario_roundtrip.json";
  save_scenario(s, path);
  REQUIRE(load_scenario(path) == s);
  std::filesystem::remove(path);
  REQUIRE(parse_scenario(serialize_scenario(s)) == s);
}

TEST_CASE("empty activity list is a valid landscape") {
  const Landscape s = empty_landscape();
  const Landscape back = parse_scenario(serialize_scenario(s));
  REQUIRE(back.activities.empty());
  REQUIRE(back == s);
}

TEST_CASE("t_end <= t_start fails validation") {
  Landscape s = empty_landscape();
  s.activities.push_back(simple_activity(0, 0, 10, 20));
  std::string text = serialize_scenario(s);
  const auto pos = text.find("\"t_end\":20");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 10, "\"t_end\":10");
  REQUIRE_THROWS_AS(parse_scenario(text), ValidationError);
  REQUIRE_THROWS_WITH(parse_scenario(text), ContainsSubstring("t_start < t_end"));
}

TEST_CASE("format errors carry line and field") {
  Landscape s = empty_landscape();
  s.activities.push_back(simple_activity(0, 0, 10, 20));
  s.activities.push_back(simple_activity(1, 1, 30, 40));
  std::string text = serialize_scenario(s);

  SECTION("unknown field") {
    std::string bad = text;
    const auto pos = bad.rfind("\"label\":1");
    bad.insert(pos, "\"colour\":3,");
    try {
      parse_scenario(bad);
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      REQUIRE(e.field() == "activities[1].colour");
      int line = 1;
      for (std::size_t i = 0; i < pos; ++i) line += bad[i] == '\n';
      REQUIRE(e.line() == line);
    }
  }
  SECTION("missing version") {
    std::string bad = text;
    const auto pos = bad.find("\"version\"");
    bad.replace(pos, 9, "\"vers1on\"");
    REQUIRE_THROWS_AS(parse_scenario(bad), FormatError);
  }
  SECTION("wrong type") {
    std::string bad = text;
    const auto pos = bad.find("\"stream\":0");
    bad.replace(pos, 10, "\"stream\":\"a\"");
    try {
      parse_scenario(bad);
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      REQUIRE(e.field() == "activities[0].stream");
    }
  }
  SECTION("not json") { REQUIRE_THROWS_AS(parse_scenario("{\"version\": 1,"), FormatError); }
}

TEST_CASE("joint distribution of a single activity") {
  Landscape s = empty_landscape();
  s.activities.push_back(simple_activity(2, 0, 100, 300));
  const auto j = activity_joint(s);
  REQUIRE(j.at(0, 2) == 1.0);
  for (int k = 0; k < s.K; ++k)
    for (int e = 0; e < j.E; ++e)
      if (k != 0 || e != 2) REQUIRE(j.at(k, e) == 0.0);
}

TEST_CASE("two equal activities on streams 0 and 1") {
  Landscape s = empty_landscape();
  s.activities.push_back(simple_activity(0, 0, 100, 300));
  s.activities.push_back(simple_activity(1, 1, 400, 600));
  const auto j = activity_joint(s);
  REQUIRE(j.p_stream[0] == 0.5);
  REQUIRE(j.p_stream[1] == 0.5);
  for (int k = 2; k < s.K; ++k) REQUIRE(j.p_stream[static_cast<std::size_t>(k)] == 0.0);
}

TEST_CASE("joint matches a frame-by-frame count") {
  const Landscape s = generate_scenario(scenario_preset("crowded"), 21);
  const auto j = activity_joint(s);
  const int E = s.label_count();
  std::vector<double> n(static_cast<std::size_t>(s.K * E), 0.0);
  double total = 0.0;
  for (int t = 0; t < s.T_total; ++t)
    for (int k = 0; k < s.K; ++k)
      for (int e = 0; e < E; ++e) {
        bool shows = false;
        for (const auto& a : s.activities) shows = shows || (a.stream == k && a.label == e && a.active_at(t));
        if (shows) {
          n[static_cast<std::size_t>(k * E + e)] += 1.0;
          total += 1.0;
        }
      }
  for (int k = 0; k < s.K; ++k)
    for (int e = 0; e < E; ++e) REQUIRE(j.at(k, e) == n[static_cast<std::size_t>(k * E + e)] / total);

  double sum = 0.0;
  for (double p : j.p) sum += p;
  REQUIRE(std::abs(sum - 1.0) < 1e-12);
  for (int k = 0; k < s.K; ++k) {
    double row = 0.0;
    for (int e = 0; e < E; ++e) row += j.at(k, e);
    REQUIRE(std::abs(row - j.p_stream[static_cast<std::size_t>(k)]) < 1e-12);
  }
  for (int e = 0; e < E; ++e) {
    double col = 0.0;
    for (int k = 0; k < s.K; ++k) col += j.at(k, e);
    REQUIRE(std::abs(col - j.p_activity[static_cast<std::size_t>(e)]) < 1e-12);
  }
}

TEST_CASE("zero activity frames make the joint undefined") {
  REQUIRE_THROWS_AS(activity_joint(empty_landscape()), DomainError);
}
