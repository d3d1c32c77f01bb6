// include/forager/gaze.hpp
//
// Within-stream attentive dynamics: alpha-stable gaze-shift proposals,
// expected-reward FoA choice and detection attempts.

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "forager/complexity.hpp"
#include "forager/geometry.hpp"
#include "forager/perception.hpp"
#include "forager/rng.hpp"
#include "forager/scenario.hpp"

namespace forager {

enum class Regime { fixational, pursuit, saccade };

std::string_view to_string(Regime regime);
Regime regime_from_string(std::string_view name);

struct GazeState {
  Vec2 foa;
  double foa_radius = 6.0;
  int stream = 0;
  Regime regime = Regime::fixational;
};

/// S(alpha, beta, gamma, delta) in the Samorodnitsky-Taqqu S1 parameterization.
struct StableParams {
  double alpha = 2.0;     // (0, 2]
  double beta = 0.0;      // [-1, 1]
  double gamma = 1.0;     // scale, cells; 0 gives a point mass at delta_loc
  double delta_loc = 0.0; // location, cells

  void validate() const;
};

struct RegimeParams {
  StableParams fixational{2.0, 0.0, 0.5, 0.0};
  StableParams pursuit{1.6, 0.0, 2.0, 0.0};
  StableParams saccade{1.2, 0.0, 6.0, 0.0};

  const StableParams& operator[](Regime r) const;
};

/// Chambers-Mallows-Stuck variate. Throws DomainError on invalid parameters.
double sample_alpha_stable(const StableParams& params, Rng& rng);

/// Terciles of the complexity range [0, 1/4].
Regime regime_for(double complexity);

struct GazeProposal {
  Regime regime = Regime::fixational;
  std::vector<Vec2> candidates;
};

/// Candidates = foa + drift toward the priority-weighted IP centroid + an
/// alpha-stable step per axis, clamped to the frame.
GazeProposal propose_gaze_shifts(const GazeState& state, std::span<const InterestPoint> ips,
                                 const ComplexityIndex& complexity, int n_candidates, const RegimeParams& params,
                                 int width, int height, Rng& rng);

/// Sum over IPs of value * N(ip | candidate, sigma_s).
double expected_reward(Vec2 candidate, std::span<const InterestPoint> ips, const Mat2& sigma_s);

/// Index of the reward-maximizing candidate; ties go to the lowest index.
std::size_t choose_foa_index(std::span<const Vec2> candidates, std::span<const InterestPoint> ips,
                             const Mat2& sigma_s);
Vec2 choose_foa(std::span<const Vec2> candidates, std::span<const InterestPoint> ips, const Mat2& sigma_s);

/// Per-element processing times; phi is linear in area.
struct DetectionTiming {
  double delta_d = 0.01;  // ticks per FoA cell^2
  double delta_h = 0.01;  // ticks per object cell^2
};

struct RewardEvent {
  int tick = 0;
  int stream = 0;
  Vec2 foa;
  bool hit = false;
  std::optional<ObjectKind> object_kind;
  double TD = 0.0;
  double TH = 0.0;
};

/// Hit with probability `accuracy` when the FoA disk overlaps an object
/// active at `tick`; TD = delta_d * FoA area, TH = delta_h * object area on hit.
RewardEvent attempt_detection(const GazeState& state, const Landscape& landscape, const ActivityIndex& index,
                              int tick, double accuracy, const DetectionTiming& timing, Rng& rng);

}  // namespace forager
