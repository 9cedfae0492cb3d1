#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cabsim/policies.hpp"
#include "cabsim/reward_models.hpp"
#include "cabsim/theta_schedule.hpp"
#include "json.hpp"

namespace cabsim {

// Monte-Carlo estimate of the survival constant: the probability that the
// paired-difference walk keeps |prefix sum| >= theta_m for every m up to the
// truncation horizon. The truncation makes the estimate an upper bound on
// the infinite-intersection probability.
struct BetaEstimate {
  double delta = 0.0;
  int64_t m0 = 0;
  double gamma = 0.0;
  int64_t truncation = 0;  // M
  int64_t reps = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<int64_t> checkpoint_ms;  // 1, 2, 4, ..., M
  std::vector<double> survival;        // survival probability at each checkpoint

  nlohmann::json to_json() const;
};

// Steps a single path: next_diff() yields Y1_j - Y2_j. Returns the first m
// with |prefix_sum(m)| < theta_table[m], or truncation + 1 if the path
// survives the whole prefix.
int64_t survival_violation_step(const std::function<double()>& next_diff,
                                std::span<const double> theta_table,
                                int64_t truncation);

BetaEstimate estimate_beta(const RewardModel& model1, const RewardModel& model2,
                           const ThetaSchedule& schedule, int64_t truncation,
                           int64_t reps, uint64_t seed, int workers = 1,
                           bool allow_zero_gap = false);

// Family minimization: estimate over every (F1, F2) pair of the instance's
// families and keep the minimum.
BetaEstimate estimate_beta_min(const CABInstance& instance,
                               const ThetaSchedule& schedule, int64_t truncation,
                               int64_t reps, uint64_t seed, int workers = 1);

// Same computation as estimate_beta; the survival curve is the deliverable.
BetaEstimate survival_curve(const RewardModel& model1, const RewardModel& model2,
                            const ThetaSchedule& schedule, int64_t truncation,
                            int64_t reps, uint64_t seed, int workers = 1,
                            bool allow_zero_gap = false);

// Termination-time statistics of single theta-test epochs driven by a policy.
// Censored replications enter the mean and quantiles at the horizon.
struct EpochLengthStats {
  int64_t reps = 0;
  int64_t horizon = 0;
  double mean_tau = 0.0;
  double censored_fraction = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;

  nlohmann::json to_json() const;
};

EpochLengthStats epoch_length_stats(const RewardModel& model1,
                                    const RewardModel& model2,
                                    const ThetaSchedule& schedule,
                                    const Policy& policy, int64_t n,
                                    int64_t reps, uint64_t seed,
                                    int workers = 1);

}  // namespace cabsim
