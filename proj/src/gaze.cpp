// src/gaze.cpp

#include "forager/gaze.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "forager/error.hpp"

namespace forager {

using std::numbers::pi;

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::fixational: return "fixational";
    case Regime::pursuit: return "pursuit";
    case Regime::saccade: return "saccade";
  }
  return "fixational";
}

Regime regime_from_string(std::string_view name) {
  if (name == "fixational") return Regime::fixational;
  if (name == "pursuit") return Regime::pursuit;
  if (name == "saccade") return Regime::saccade;
  throw ConfigError("unknown gaze regime '" + std::string(name) + "'");
}

void StableParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha-stable: alpha must lie in (0, 2]");
  if (!(beta >= -1.0 && beta <= 1.0)) throw DomainError("alpha-stable: beta must lie in [-1, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("alpha-stable: gamma must be finite and >= 0");
  if (!std::isfinite(delta_loc)) throw DomainError("alpha-stable: location must be finite");
}

const StableParams& RegimeParams::operator[](Regime r) const {
  switch (r) {
    case Regime::fixational: return fixational;
    case Regime::pursuit: return pursuit;
    case Regime::saccade: return saccade;
  }
  return fixational;
}

double sample_alpha_stable(const StableParams& p, Rng& rng) {
  p.validate();
  double u;
  do {
    u = rng.uniform();
  } while (u == 0.0);
  const double V = pi * (u - 0.5);
  const double W = rng.exponential();
  if (p.gamma == 0.0) return p.delta_loc;

  const double a = p.alpha;
  if (a == 1.0) {
    const double h = pi / 2.0 + p.beta * V;
    const double X = (2.0 / pi) * (h * std::tan(V) - p.beta * std::log((pi / 2.0) * W * std::cos(V) / h));
    return p.gamma * X + (2.0 / pi) * p.beta * p.gamma * std::log(p.gamma) + p.delta_loc;
  }
  const double t = p.beta * std::tan(pi * a / 2.0);
  const double B = std::atan(t) / a;
  const double S = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
  const double X = S * std::sin(a * (V + B)) / std::pow(std::cos(V), 1.0 / a) *
                   std::pow(std::cos(V - a * (V + B)) / W, (1.0 - a) / a);
  return p.gamma * X + p.delta_loc;
}

Regime regime_for(double c) {
  if (c < 1.0 / 12.0) return Regime::fixational;
  if (c < 1.0 / 6.0) return Regime::pursuit;
  return Regime::saccade;
}

GazeProposal propose_gaze_shifts(const GazeState& state, std::span<const InterestPoint> ips,
                                 const ComplexityIndex& complexity, int n_candidates, const RegimeParams& params,
                                 int width, int height, Rng& rng) {
  if (n_candidates < 1) throw DomainError("at least one candidate gaze shift is required");
  GazeProposal out;
  out.regime = regime_for(complexity.C);
  const StableParams& sp = params[out.regime];
  sp.validate();

  Vec2 drift{};
  double mass = 0.0;
  Vec2 weighted{};
  for (const auto& ip : ips) {
    mass += ip.value;
    weighted = weighted + ip.value * ip.pos;
  }
  if (mass > 0.0) {
    const Vec2 to_centroid = (1.0 / mass) * weighted - state.foa;
    const double dist = to_centroid.norm();
    // Capped at the distance so the drift never overshoots the centroid.
    if (dist > 0.0) drift = (std::min(sp.gamma, dist) / dist) * to_centroid;
  }

  out.candidates.reserve(static_cast<std::size_t>(n_candidates));
  for (int i = 0; i < n_candidates; ++i) {
    const double sx = sample_alpha_stable(sp, rng);
    const double sy = sample_alpha_stable(sp, rng);
    out.candidates.push_back(clamp_to_frame(state.foa + drift + Vec2{sx, sy}, width, height));
  }
  return out;
}

double expected_reward(Vec2 candidate, std::span<const InterestPoint> ips, const Mat2& s) {
  const double det = s.det();
  if (!(det > 0.0) || !(s.xx > 0.0)) throw DomainError("sigma_s must be positive definite");
  const double ixx = s.yy / det, ixy = -s.xy / det, iyy = s.xx / det;
  const double norm = 1.0 / (2.0 * pi * std::sqrt(det));
  double total = 0.0;
  for (const auto& ip : ips) {
    const Vec2 d = ip.pos - candidate;
    const double q = ixx * d.x * d.x + 2.0 * ixy * d.x * d.y + iyy * d.y * d.y;
    total += ip.value * norm * std::exp(-0.5 * q);
  }
  return total;
}

std::size_t choose_foa_index(std::span<const Vec2> candidates, std::span<const InterestPoint> ips,
                             const Mat2& sigma_s) {
  if (candidates.empty()) throw DomainError("no candidate gaze shifts");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = expected_reward(candidates[i], ips, sigma_s);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

Vec2 choose_foa(std::span<const Vec2> candidates, std::span<const InterestPoint> ips, const Mat2& sigma_s) {
  return candidates[choose_foa_index(candidates, ips, sigma_s)];
}

RewardEvent attempt_detection(const GazeState& state, const Landscape& landscape, const ActivityIndex& index,
                              int tick, double accuracy, const DetectionTiming& timing, Rng& rng) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw DomainError("detector accuracy must lie in [0, 1]");
  RewardEvent ev;
  ev.tick = tick;
  ev.stream = state.stream;
  ev.foa = state.foa;
  ev.TD = timing.delta_d * pi * state.foa_radius * state.foa_radius;

  const VisibleObject* target = nullptr;
  double best_gap = std::numeric_limits<double>::infinity();
  const auto objects = visible_objects(landscape, index, state.stream, tick);
  for (const auto& o : objects) {
    const double gap = (o.pos - state.foa).norm() - (state.foa_radius + o.extent);
    if (gap <= 0.0 && gap < best_gap) {
      best_gap = gap;
      target = &o;
    }
  }
  const double u = rng.uniform();
  if (target != nullptr && u < accuracy) {
    ev.hit = true;
    ev.object_kind = target->kind;
    ev.TH = timing.delta_h * pi * target->extent * target->extent;
  }
  return ev;
}

}  // namespace forager
