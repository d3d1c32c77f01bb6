// include/forager/scenario.hpp
//
// Synthetic multi-stream landscapes: K streams of timed ground-truth
// activities, each carrying face/body tracks on a width x height grid.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forager {

inline constexpr int kScenarioVersion = 1;

enum class ObjectKind { face = 0, body = 1 };
inline constexpr int kObjectKindCount = 2;

std::string_view to_string(ObjectKind kind);
ObjectKind object_kind_from_string(std::string_view name);

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(Cell, Cell) = default;
};

struct ObjectTrack {
  ObjectKind kind = ObjectKind::body;
  double extent = 1.0;           // radius in cells
  std::vector<Cell> positions;   // one per tick of the parent span
  friend bool operator==(const ObjectTrack&, const ObjectTrack&) = default;
};

struct Activity {
  int label = 0;
  int stream = 0;
  int t_start = 0;  // inclusive
  int t_end = 0;    // exclusive
  std::vector<ObjectTrack> objects;

  int duration() const { return t_end - t_start; }
  bool active_at(int t) const { return t >= t_start && t < t_end; }
  friend bool operator==(const Activity&, const Activity&) = default;
};

struct Landscape {
  int K = 1;
  int width = 64;
  int height = 48;
  int T_total = 0;
  std::vector<Activity> activities;

  /// Number of activity classes, i.e. one past the largest label in use.
  int label_count() const;
  friend bool operator==(const Landscape&, const Landscape&) = default;
};

/// Throws ValidationError naming the first violated invariant.
void validate(const Landscape& landscape);

/// Per-stream lookup of the activities active at a given tick.
class ActivityIndex {
 public:
  explicit ActivityIndex(const Landscape& landscape);
  /// Indices into landscape.activities active on `stream` at tick `t`.
  std::vector<int> active(int stream, int t) const;
  const std::vector<int>& on_stream(int stream) const { return by_stream_[static_cast<std::size_t>(stream)]; }

 private:
  const Landscape* landscape_;
  std::vector<std::vector<int>> by_stream_;
};

struct ScenarioConfig {
  int K = 8;
  int width = 64;
  int height = 48;
  int T_total = 8000;
  int activity_count = 40;
  /// Relative class frequencies; need not sum to one.
  std::vector<double> class_rates;
  /// Relative stream loads; empty means uniform.
  std::vector<double> stream_weights;
  double mean_duration = 500.0;
  /// Durations are uniform in mean * [1 - spread, 1 + spread].
  double duration_spread = 0.5;
  int min_objects = 1;
  int max_objects = 2;
  double min_extent = 2.0;
  double max_extent = 4.0;
  /// Maximum per-tick jitter (cells) around the piecewise-linear path.
  int jitter = 1;
  /// Number of linear legs of each object path.
  int path_legs = 3;
};

/// Throws ConfigError.
void validate(const ScenarioConfig& config);

Landscape generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Built-in presets: "ucr-like", "sparse", "crowded".
ScenarioConfig scenario_preset(std::string_view name);
std::vector<std::string> scenario_preset_names();

std::string serialize_scenario(const Landscape& landscape);
Landscape parse_scenario(std::string_view text);
void save_scenario(const Landscape& landscape, const std::filesystem::path& path);
Landscape load_scenario(const std::filesystem::path& path);

/// Tick window [begin, end).
struct TickWindow {
  int begin = 0;
  int end = 0;
  int length() const { return end - begin; }
};

/// Empirical P(k, e) from frame counts N(k, e), with both marginals.
struct JointDistribution {
  int K = 0;
  int E = 0;
  std::vector<double> p;           // row-major K x E
  std::vector<double> p_stream;    // P(k)
  std::vector<double> p_activity;  // P(e)

  double at(int k, int e) const { return p[static_cast<std::size_t>(k) * static_cast<std::size_t>(E) + static_cast<std::size_t>(e)]; }
};

/// Normalizes a K x E count table; throws DomainError when all counts are zero.
JointDistribution joint_from_counts(int K, int E, const std::vector<double>& counts);

/// N(k, e) = number of ticks in which stream k displays activity e
/// (overlapping same-label spans on one stream count once).
JointDistribution activity_joint(const Landscape& landscape, std::optional<TickWindow> window = std::nullopt);

}  // namespace forager
