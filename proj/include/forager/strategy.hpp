// include/forager/strategy.hpp
//
// Stream giving-up policies: the Bayesian leave rule with Gamma-conjugate
// rate learning, and the Charnov, deterministic and random baselines.

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "forager/gaze.hpp"
#include "forager/rng.hpp"

namespace forager {

enum class StrategyKind { bayesian, charnov, deterministic, random };

std::string_view to_string(StrategyKind kind);
/// Accepts canonical names and the short forms "bayes" and "det".
StrategyKind strategy_kind_from_string(std::string_view name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::bayesian;
  double nu0 = 1.0;            // bayesian: prior reward count
  double Delta0 = 100.0;       // bayesian: prior capture time, ticks
  double charnov_slope = 1.0;  // charnov: delta, initial slope of the gain function
  double travel_time = 1.0;    // charnov: t_b
  double dwell = 100.0;        // deterministic: Delta_w, ticks
  double max_dwell = 200.0;    // random: b_w, ticks

  void validate() const;
};

/// P(R | C) = 1 - exp(-lambda t).
double gain_probability(double lambda, double t);

struct BayesianState {
  double nu0 = 1.0;
  double Delta0 = 100.0;
  double nu = 1.0;
  double Delta = 100.0;
  int n = 0;
  int t_in = 0;

  static BayesianState prior(double nu0, double Delta0, int t_in = 0);
  double lambda_bar() const { return nu / Delta; }
};

/// Hit: n += 1, nu = nu0 + n, Delta += TD + TH. Miss: Delta += TD.
BayesianState update_bayesian(BayesianState state, const RewardEvent& event);

/// Leave iff C_k exp(-lambda_bar t_rel) <= mean complexity of the other
/// streams. At t_rel = 0 this is the failed entry hypothesis. Never leaves when
/// no other stream has positive complexity.
bool should_leave_bayesian(const BayesianState& state, double c_k, double c_others_mean, double t_rel);

/// Posterior that stream k still yields a reward given none by time t:
/// P_k / (exp(lambda t) * sum_{i != k} P_i + P_k), with P from normalized
/// complexities. Throws DomainError on invalid inputs.
double posterior_no_reward(std::span<const double> complexities, int k, double lambda, double t);

/// Closed-form crossing time (1/lambda) ln(C_k / <C>).
double bayesian_leave_time(double c_k, double c_others_mean, double lambda);

/// Residence time C_in * sqrt(t_b / (<C> delta)), unrounded.
double charnov_residence_exact(double c_in, double c_mean, double slope, double travel_time);
/// Residence rounded up to an integer dwell.
int charnov_residence(double c_in, double c_mean, double slope, double travel_time);

enum class LeaveReason { none, bayes, charnov, deterministic, random, hypothesis };
std::string_view to_string(LeaveReason reason);
LeaveReason leave_reason_from_string(std::string_view name);

struct EntryContext {
  int tick = 0;
  double c_k = 0.0;          // complexity of the entered stream
  double c_mean_all = 0.0;   // mean over all streams
};

struct TickContext {
  int t_rel = 0;
  double c_k = 0.0;
  double c_others_mean = 0.0;
};

/// Stateful giving-up decision for one stream visit at a time.
class GivingUpPolicy {
 public:
  explicit GivingUpPolicy(StrategyConfig config);

  /// Start a visit; baselines fix their dwell here, the Bayesian state resets.
  void enter(const EntryContext& ctx, Rng& rng);
  void observe(const RewardEvent& event);
  /// LeaveReason::none means stay.
  LeaveReason should_leave(const TickContext& ctx) const;

  const StrategyConfig& config() const { return config_; }
  const BayesianState& bayesian_state() const { return bayes_; }
  double dwell_target() const { return dwell_; }

 private:
  StrategyConfig config_;
  BayesianState bayes_;
  double dwell_ = 0.0;
};

}  // namespace forager
