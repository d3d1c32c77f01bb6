// include/forager/engine.hpp
//
// Tick-driven simulation: a preattentive pass over every stream each tick,
// categorical stream selection with a one-tick travel cost, and attentive
// handling of the chosen stream until the giving-up policy fires.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forager/complexity.hpp"
#include "forager/gaze.hpp"
#include "forager/perception.hpp"
#include "forager/scenario.hpp"
#include "forager/strategy.hpp"

namespace forager {

struct CellGridConfig {
  int rows = 8;
  int cols = 8;
};

/// Field names match the JSON config keys.
struct ForagerConfig {
  std::array<double, kObjectKindCount> task_prior{0.5, 0.5};  // face, body
  int N_P_max = 15;
  int N_s = 50;
  int N_new = 10;
  CellGridConfig cell_grid;
  RegimeParams stable_params;
  /// Isotropic variance of the reward kernel; defaults to (FoA radius)^2.
  std::optional<double> sigma_s;
  double detector_accuracy = 0.9;
  double delta_D = 0.01;
  double delta_H = 0.01;
  double likelihood_floor = 0.01;
  SensorConfig sensor;
  StrategyConfig strategy;
  std::uint64_t seed = 1;
  int setup_ticks = 1000;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Complexity of every stream at every tick of a window.
struct PreattentiveTrace {
  TickWindow window;
  int K = 0;
  std::vector<ComplexityIndex> data;  // [(t - begin) * K + k]

  const ComplexityIndex& at(int t, int k) const {
    return data[static_cast<std::size_t>(t - window.begin) * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)];
  }
};

/// Preattentive loop; streams are split across `jobs` threads, each stream
/// owning an rng substream so the result does not depend on `jobs`.
PreattentiveTrace compute_preattentive(const Landscape& landscape, const ForagerConfig& config, TickWindow window,
                                       int jobs = 1);

/// Complexity of one preattentive frame.
ComplexityIndex preattentive_complexity(const Landscape& landscape, const ActivityIndex& index,
                                        const ForagerConfig& config, int stream, int tick, Rng& rng);

struct TimelineEntry {
  int tick = 0;
  int stream = 0;
  Vec2 foa;
  std::optional<Regime> regime;  // empty on travel ticks
  bool hit = false;
  bool switched = false;
  LeaveReason leave_reason = LeaveReason::none;

  bool travel() const { return !regime.has_value(); }
  friend bool operator==(const TimelineEntry&, const TimelineEntry&) = default;
};

struct Switch {
  int tick = 0;
  int from = 0;
  int to = 0;
  friend bool operator==(const Switch&, const Switch&) = default;
};

struct Timeline {
  std::vector<TimelineEntry> entries;
  std::vector<Switch> switches;

  std::size_t switch_count() const { return switches.size(); }
  friend bool operator==(const Timeline&, const Timeline&) = default;
};

struct RunOptions {
  /// Defaults to the whole landscape.
  std::optional<TickWindow> window;
  int jobs = 1;
  /// Reuse a trace computed with the same landscape, config and window.
  const PreattentiveTrace* preattentive = nullptr;
  /// When set, the attended stream's attentive priority map and protos are
  /// written here as CSV, one pair of files per tick.
  std::optional<std::filesystem::path> dump_dir;
};

Timeline run(const Landscape& landscape, const ForagerConfig& config, const RunOptions& options = {});

/// Test window [setup_ticks, T_total), or the whole landscape when it is too short.
TickWindow test_window(const Landscape& landscape, const ForagerConfig& config);
TickWindow setup_window(const Landscape& landscape, const ForagerConfig& config);

std::string timeline_csv(const Timeline& timeline);
Timeline parse_timeline_csv(std::string_view text);
void emit_timeline(const Timeline& timeline, const std::filesystem::path& path);
Timeline load_timeline(const std::filesystem::path& path);

/// Columns: tick, stream, H, delta, omega, C.
std::string complexity_trace_csv(const PreattentiveTrace& trace);
/// Columns: tick, stream, foa_x, foa_y, regime, hit (attentive ticks only).
std::string gaze_trace_csv(const Timeline& timeline);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace forager
