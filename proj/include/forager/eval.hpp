// include/forager/eval.hpp
//
// Frame-level scoring of a timeline against ground truth, and multi-seed
// strategy comparison.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forager/engine.hpp"
#include "forager/scenario.hpp"

namespace forager {

struct ActivityScore {
  int label = 0;
  long TP = 0;  // attended frames showing the activity
  long NP = 0;  // frames in which the activity occurs on any stream
  double A = 0.0;
  bool included = true;  // false when NP = 0
};

struct EvalReport {
  double A = 0.0;
  double avgA = 0.0;
  std::vector<ActivityScore> per_activity;
  /// Output joint over attended frames; empty when no attended frame shows an activity.
  std::optional<JointDistribution> joint_out;
  std::size_t switch_count = 0;
  double kl_activity = 0.0;
  std::vector<std::string> warnings;
  TickWindow window;
};

/// A = sum TP / sum NP; avgA = mean of A_e over classes with NP_e > 0.
struct AccuracySummary {
  double A = 0.0;
  double avgA = 0.0;
  std::vector<double> A_e;
  std::vector<bool> included;
};
AccuracySummary accuracy_from_counts(std::span<const long> TP, std::span<const long> NP);

/// KL(p || q) with additive smoothing eps on both sides, renormalized.
double kl_divergence(std::span<const double> p, std::span<const double> q, double eps = 1e-9);

/// Scores the ticks in `window` (default: the span covered by the timeline).
/// Travel ticks contribute no output frame.
EvalReport evaluate(const Timeline& timeline, const Landscape& landscape,
                    std::optional<TickWindow> window = std::nullopt);

std::string report_json(const EvalReport& report, int indent = 2);

// ---------------------------------------------------------------------------
// Comparison

struct RunResult {
  std::string name;
  std::uint64_t seed = 0;
  double A = 0.0;
  double avgA = 0.0;
  std::size_t switch_count = 0;
  double kl_activity = 0.0;
  bool excluded = false;  // switch_count >= switch_bound
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};
MeanSd mean_sd(std::span<const double> values);

struct ComparisonRow {
  std::string name;
  StrategyConfig strategy;
  MeanSd A;
  MeanSd avgA;
  MeanSd switches;
  MeanSd kl;
  int excluded_runs = 0;
  int runs = 0;
  bool excluded = false;  // any run violated the bound
  std::vector<RunResult> per_seed;
};

struct ComparisonTable {
  int switch_bound = 0;
  TickWindow window;
  std::vector<ComparisonRow> rows;
  /// Indices into rows of non-excluded rows, best mean accuracy first.
  std::vector<std::size_t> ranking;
};

struct NamedConfig {
  std::string name;
  ForagerConfig config;
};

struct CompareOptions {
  std::optional<TickWindow> window;  // default: test window of the first config
  int jobs = 1;
};

/// Runs every (config, seed) cell with config.seed replaced by the seed;
/// a run is excluded when its switch count is not below `switch_bound`.
ComparisonTable compare_strategies(const Landscape& landscape, std::span<const NamedConfig> configs,
                                   std::span<const std::uint64_t> seeds, int switch_bound,
                                   const CompareOptions& options = {});

/// Candidate parameter values for one strategy kind.
std::vector<StrategyConfig> tuning_grid(const StrategyConfig& base);

struct TuningResult {
  StrategyConfig best;
  double score = 0.0;  // mean objective on the setup window
  double mean_switches = 0.0;
  bool within_bound = false;
};

enum class TuneObjective { accuracy, avg_accuracy, mean };
std::string_view to_string(TuneObjective objective);
TuneObjective tune_objective_from_string(std::string_view name);

/// Picks the grid candidate with the best mean objective on the setup window
/// among those whose mean switch count, scaled to the test window length, stays
/// below the bound; falls back to the fewest switches when none does.
TuningResult tune_strategy(const Landscape& landscape, const ForagerConfig& base, int switch_bound,
                           std::span<const std::uint64_t> tuning_seeds, int jobs = 1,
                           TuneObjective objective = TuneObjective::mean);

std::string comparison_json(const ComparisonTable& table, int indent = 2);
/// One row per measure (accuracy, avg_accuracy), one column per strategy.
std::string comparison_csv(const ComparisonTable& table);

}  // namespace forager
