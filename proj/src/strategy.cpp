// src/strategy.cpp

#include "forager/strategy.hpp"

#include <cmath>

#include "forager/error.hpp"

namespace forager {

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::bayesian: return "bayesian";
    case StrategyKind::charnov: return "charnov";
    case StrategyKind::deterministic: return "deterministic";
    case StrategyKind::random: return "random";
  }
  return "bayesian";
}

StrategyKind strategy_kind_from_string(std::string_view name) {
  if (name == "bayesian" || name == "bayes") return StrategyKind::bayesian;
  if (name == "charnov") return StrategyKind::charnov;
  if (name == "deterministic" || name == "det") return StrategyKind::deterministic;
  if (name == "random") return StrategyKind::random;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (valid kinds: bayesian|bayes, charnov, deterministic|det, random)");
}

void StrategyConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("strategy parameter '") + name + "' must be > 0");
  };
  positive(nu0, "nu0");
  positive(Delta0, "Delta0");
  positive(charnov_slope, "charnov_slope");
  positive(travel_time, "travel_time");
  positive(dwell, "dwell");
  positive(max_dwell, "max_dwell");
}

double gain_probability(double lambda, double t) {
  if (!(lambda > 0.0)) throw DomainError("gain function: lambda must be > 0");
  if (!(t >= 0.0)) throw DomainError("gain function: t must be >= 0");
  return -std::expm1(-lambda * t);
}

BayesianState BayesianState::prior(double nu0, double Delta0, int t_in) {
  if (!(nu0 > 0.0) || !(Delta0 > 0.0)) throw DomainError("Gamma prior hyper-parameters must be > 0");
  return BayesianState{nu0, Delta0, nu0, Delta0, 0, t_in};
}

BayesianState update_bayesian(BayesianState s, const RewardEvent& ev) {
  s.Delta += ev.TD;
  if (ev.hit) {
    s.n += 1;
    s.nu = s.nu0 + s.n;
    s.Delta += ev.TH;
  }
  return s;
}

bool should_leave_bayesian(const BayesianState& s, double c_k, double c_others_mean, double t_rel) {
  if (!(c_others_mean > 0.0)) return false;
  return c_k * std::exp(-s.lambda_bar() * t_rel) <= c_others_mean;
}

double posterior_no_reward(std::span<const double> cs, int k, double lambda, double t) {
  if (k < 0 || static_cast<std::size_t>(k) >= cs.size()) throw DomainError("posterior: stream index out of range");
  if (!(lambda > 0.0) || !(t >= 0.0)) throw DomainError("posterior: need lambda > 0 and t >= 0");
  double total = 0.0;
  for (double c : cs) {
    if (!(c >= 0.0)) throw DomainError("posterior: complexities must be nonnegative");
    total += c;
  }
  if (!(total > 0.0)) throw DomainError("posterior: complexities sum to zero");
  const double p_k = cs[static_cast<std::size_t>(k)] / total;
  double others = 0.0;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (static_cast<int>(i) != k) others += cs[i] / total;
  const double denom = std::exp(lambda * t) * others + p_k;
  if (!(denom > 0.0) || !std::isfinite(denom)) throw DomainError("posterior: nonpositive denominator");
  return p_k / denom;
}

double bayesian_leave_time(double c_k, double c_others_mean, double lambda) {
  if (!(c_k > 0.0) || !(c_others_mean > 0.0) || !(lambda > 0.0))
    throw DomainError("leave time needs positive complexities and rate");
  return std::log(c_k / c_others_mean) / lambda;
}

double charnov_residence_exact(double c_in, double c_mean, double slope, double travel_time) {
  if (!(c_mean > 0.0)) throw DomainError("charnov residence: mean complexity must be > 0");
  if (!(c_in > 0.0) || !(slope > 0.0) || !(travel_time > 0.0))
    throw DomainError("charnov residence: inputs must be > 0");
  return c_in * std::sqrt(travel_time / (c_mean * slope));
}

int charnov_residence(double c_in, double c_mean, double slope, double travel_time) {
  const double exact = charnov_residence_exact(c_in, c_mean, slope, travel_time);
  constexpr double kMaxDwell = 1e9;
  return static_cast<int>(std::max(1.0, std::ceil(std::min(exact, kMaxDwell))));
}

std::string_view to_string(LeaveReason r) {
  switch (r) {
    case LeaveReason::none: return "";
    case LeaveReason::bayes: return "bayes";
    case LeaveReason::charnov: return "charnov";
    case LeaveReason::deterministic: return "deterministic";
    case LeaveReason::random: return "random";
    case LeaveReason::hypothesis: return "hypothesis";
  }
  return "";
}

LeaveReason leave_reason_from_string(std::string_view name) {
  if (name.empty()) return LeaveReason::none;
  if (name == "bayes") return LeaveReason::bayes;
  if (name == "charnov") return LeaveReason::charnov;
  if (name == "deterministic") return LeaveReason::deterministic;
  if (name == "random") return LeaveReason::random;
  if (name == "hypothesis") return LeaveReason::hypothesis;
  throw ConfigError("unknown leave reason '" + std::string(name) + "'");
}

GivingUpPolicy::GivingUpPolicy(StrategyConfig config) : config_(config) {
  config_.validate();
  bayes_ = BayesianState::prior(config_.nu0, config_.Delta0);
}

void GivingUpPolicy::enter(const EntryContext& ctx, Rng& rng) {
  switch (config_.kind) {
    case StrategyKind::bayesian:
      bayes_ = BayesianState::prior(config_.nu0, config_.Delta0, ctx.tick);
      break;
    case StrategyKind::deterministic:
      dwell_ = config_.dwell;
      break;
    case StrategyKind::random:
      dwell_ = rng.uniform(0.0, config_.max_dwell);
      break;
    case StrategyKind::charnov:
      // An empty landscape has no resource level to weigh; move on after one tick.
      dwell_ = (ctx.c_k > 0.0 && ctx.c_mean_all > 0.0)
                   ? charnov_residence(ctx.c_k, ctx.c_mean_all, config_.charnov_slope, config_.travel_time)
                   : 1.0;
      break;
  }
}

void GivingUpPolicy::observe(const RewardEvent& event) {
  if (config_.kind == StrategyKind::bayesian) bayes_ = update_bayesian(bayes_, event);
}

LeaveReason GivingUpPolicy::should_leave(const TickContext& ctx) const {
  switch (config_.kind) {
    case StrategyKind::bayesian:
      if (!should_leave_bayesian(bayes_, ctx.c_k, ctx.c_others_mean, ctx.t_rel)) return LeaveReason::none;
      return ctx.t_rel == 0 ? LeaveReason::hypothesis : LeaveReason::bayes;
    case StrategyKind::deterministic:
      return ctx.t_rel >= dwell_ ? LeaveReason::deterministic : LeaveReason::none;
    case StrategyKind::random:
      return ctx.t_rel >= dwell_ ? LeaveReason::random : LeaveReason::none;
    case StrategyKind::charnov:
      return ctx.t_rel >= dwell_ ? LeaveReason::charnov : LeaveReason::none;
  }
  throw ConfigError("unknown strategy kind");
}

}  // namespace forager
