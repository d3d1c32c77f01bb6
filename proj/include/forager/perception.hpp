// include/forager/perception.hpp
//
// Priority maps, proto-objects and interest points. Real pixel features are
// replaced by a synthetic sensor driven by the landscape ground truth.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "forager/geometry.hpp"
#include "forager/rng.hpp"
#include "forager/scenario.hpp"

namespace forager {

enum class PerceptionMode { preattentive, attentive };

/// Bottom-up evidence plus per-class object likelihood maps.
struct FeatureField {
  Grid<double> bottom_up;
  std::array<Grid<double>, kObjectKindCount> object_likelihood;
};

/// Normalized posterior over relevant locations.
struct PriorityMap {
  Grid<double> grid;
  int tick = 0;
  int stream = 0;
  PerceptionMode mode = PerceptionMode::preattentive;
};

struct AttentionOptions {
  /// Task prior over object kinds (face, body).
  std::array<double, kObjectKindCount> task_prior{0.5, 0.5};
  /// Outside this radius around the FoA evidence is attenuated.
  double foa_radius = 6.0;
  /// Likelihood assigned to locations where no object feature fires.
  double likelihood_floor = 0.01;
};

/// FoA radius: floor(min(width, height) / 8), at least one cell.
double foa_radius_for(int width, int height);

/// Preattentive: normalized bottom-up evidence. Attentive: normalized product of
/// bottom-up evidence, the task-weighted object likelihood and foveal
/// attenuation around `foa`. Throws DegenerateError when no mass survives.
PriorityMap priority_posterior(const FeatureField& features, PerceptionMode mode, std::optional<Vec2> foa,
                               const AttentionOptions& options = {}, int tick = 0, int stream = 0);

/// Uniform map, used by callers as the fallback for degenerate evidence.
PriorityMap uniform_priority(int width, int height, int tick, int stream, PerceptionMode mode);

struct InterestPoint {
  Vec2 pos;
  double value = 0.0;
  int proto = 0;
};

struct ProtoObject {
  int id = 0;
  std::vector<int> mask;  // linear cell indices
  Vec2 mu;
  Mat2 sigma;
  double area = 0.0;  // pi * sigma_1 * sigma_2
  double mass = 0.0;  // summed priority over the mask
  std::vector<InterestPoint> ips;
};

/// Strict exceedance threshold: the empirical 95th percentile (nearest rank).
double exceedance_threshold(std::span<const double> values, double quantile = 0.95);

/// Threshold, label 8-connected components, fit a priority-weighted Gaussian to
/// each, keep the `max_protos` with the largest mass.
std::vector<ProtoObject> extract_proto_objects(const PriorityMap& map, int max_protos);

/// IP budget per proto: ceil(n_samples * A_p / sum A).
std::vector<int> interest_point_budget(std::span<const ProtoObject> protos, int n_samples);

/// Draw each proto's IPs from N(mu_p, Sigma_p), clamped to the frame, valued by
/// the priority at their cell. Throws DegenerateError on zero total area.
std::vector<ProtoObject> sample_interest_points(std::vector<ProtoObject> protos, int n_samples,
                                                const PriorityMap& map, Rng& rng);

/// Flattened IPs of all protos.
std::vector<InterestPoint> all_interest_points(std::span<const ProtoObject> protos);

/// Parameters of the synthetic sensor that stands in for pixel features.
struct SensorConfig {
  double floor = 1e-3;            // constant bottom-up background
  double noise = 0.0;             // white-noise amplitude added to the background
  double amplitude = 1.0;         // peak of an object's bottom-up bump
  double miss_rate = 0.05;        // per-object chance the class map misses it
  double false_alarm_rate = 0.02; // per-frame chance of a spurious class bump
  double false_alarm_extent = 2.0;
};

/// Bottom-up = floor + noise + sum of isotropic Gaussian bumps (sigma = extent)
/// at the active objects; class maps = the same bumps masked by kind, with
/// misses and false alarms.
/// The bottom-up part alone; draws the same noise as synthesize_features.
Grid<double> synthesize_bottom_up(const Landscape& landscape, const ActivityIndex& index, int stream, int tick,
                                  const SensorConfig& sensor, Rng& rng);

FeatureField synthesize_features(const Landscape& landscape, const ActivityIndex& index, int stream, int tick,
                                 const SensorConfig& sensor, Rng& rng);

/// Positions (cell centres) and extents of objects active on a stream at a tick.
struct VisibleObject {
  Vec2 pos;
  double extent = 1.0;
  ObjectKind kind = ObjectKind::body;
};
std::vector<VisibleObject> visible_objects(const Landscape& landscape, const ActivityIndex& index, int stream,
                                           int tick);

}  // namespace forager
