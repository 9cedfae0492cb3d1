#include <cmath>

#include "cabsim/beta_estimator.hpp"
#include "doctest.h"

using namespace cabsim;

TEST_SUITE("beta-estimator") {

TEST_CASE("drifting deterministic path survives every threshold") {
  const ThetaSchedule schedule(4000, 2.1);
  const auto table = schedule.table(10000);
  auto plus_one = []() { return 1.0; };
  CHECK(survival_violation_step(plus_one, table, 10000) == 10001);
  auto zero = []() { return 0.0; };
  CHECK(survival_violation_step(zero, table, 10000) == 1);
}

TEST_CASE("survival at m = 1 matches the exact enumeration") {
  // Bernoulli(0.9) vs Bernoulli(0.5): |Y1 - Y2| = 1 with probability
  // 0.9*0.5 + 0.1*0.5 = 0.5, and theta_1 < 1 admits only those paths.
  const ThetaSchedule schedule(4000, 2.1);
  const auto est = estimate_beta(RewardModel::bernoulli(0.9),
                                 RewardModel::bernoulli(0.5), schedule,
                                 /*truncation=*/4, /*reps=*/20000, 11, 2);
  REQUIRE(est.checkpoint_ms.front() == 1);
  const double se = std::sqrt(0.25 / 20000.0);
  CHECK(std::abs(est.survival.front() - 0.5) < 4 * se);
}

TEST_CASE("estimate is monotone in the truncation horizon") {
  const ThetaSchedule schedule(4000, 2.1);
  const auto b1 = RewardModel::bernoulli(0.9);
  const auto b2 = RewardModel::bernoulli(0.5);
  const auto short_run = estimate_beta(b1, b2, schedule, 100, 2000, 5, 2);
  const auto long_run = estimate_beta(b1, b2, schedule, 1000, 2000, 5, 2);
  CHECK(long_run.estimate <= short_run.estimate);
}

TEST_CASE("estimate grows with the gap") {
  const ThetaSchedule schedule(4000, 2.1);
  double prev = -1.0;
  for (const double mu2 : {0.7, 0.5, 0.3}) {
    const auto est = estimate_beta(RewardModel::bernoulli(0.9),
                                   RewardModel::bernoulli(mu2), schedule,
                                   10000, 2000, 5, 2);
    const double slack = 2.0 * std::sqrt(2.0) * est.std_error;
    CHECK(est.estimate >= prev - slack);
    prev = est.estimate;
  }
}

TEST_CASE("estimates replay bit-exactly") {
  const ThetaSchedule schedule(4000, 2.1);
  const auto b1 = RewardModel::bernoulli(0.8);
  const auto b2 = RewardModel::bernoulli(0.4);
  const auto a = estimate_beta(b1, b2, schedule, 2000, 1000, 77, 2);
  const auto b = estimate_beta(b1, b2, schedule, 2000, 1000, 77, 1);
  CHECK(a.estimate == b.estimate);
  CHECK(a.survival == b.survival);
}

TEST_CASE("zero gap is diagnostic-only and decays") {
  const ThetaSchedule schedule(4000, 2.1);
  const auto b = RewardModel::bernoulli(0.5);
  CHECK_THROWS_AS(estimate_beta(b, b, schedule, 100, 100, 1, 1),
                  std::invalid_argument);
  const auto est = estimate_beta(b, b, schedule, 100000, 500, 1, 2,
                                 /*allow_zero_gap=*/true);
  CHECK(est.estimate < 0.05);
}

TEST_CASE("curve and estimate share the terminal value") {
  const ThetaSchedule schedule(4000, 2.1);
  const auto est = survival_curve(RewardModel::bernoulli(0.9),
                                  RewardModel::bernoulli(0.5), schedule, 512,
                                  1000, 3, 2);
  CHECK(est.checkpoint_ms.back() == 512);
  CHECK(est.survival.back() == est.estimate);
  for (size_t i = 1; i < est.survival.size(); ++i) {
    CHECK(est.survival[i] <= est.survival[i - 1]);
  }
}

TEST_CASE("family minimization reduces to the singleton case") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 0.5);
  const ThetaSchedule schedule(4000, 2.1);
  const uint64_t seed = 42;
  const auto min_est = estimate_beta_min(inst, schedule, 1000, 1000, seed, 2);
  const uint64_t pair_seed = mix64(seed ^ (0x9e3779b97f4a7c15ULL * 1));
  const auto direct = estimate_beta(RewardModel::bernoulli(0.9),
                                    RewardModel::bernoulli(0.5), schedule,
                                    1000, 1000, pair_seed, 2);
  CHECK(min_est.estimate == direct.estimate);
}

TEST_CASE("family minimization takes the minimum over pairs") {
  const auto inst = CABInstance::make(
      0.9, 0.5, 0.5, {RewardModel::bernoulli(0.9)},
      {RewardModel::bernoulli(0.5), RewardModel::beta(1, 1)});
  const ThetaSchedule schedule(4000, 2.1);
  const auto min_est = estimate_beta_min(inst, schedule, 1000, 1000, 42, 2);
  // the minimum cannot exceed either per-pair estimate; recompute both
  double lowest = 1.0;
  uint64_t pair_index = 0;
  for (const auto& f2 :
       {RewardModel::bernoulli(0.5), RewardModel::beta(1, 1)}) {
    const uint64_t pair_seed =
        mix64(42ULL ^ (0x9e3779b97f4a7c15ULL * ++pair_index));
    lowest = std::min(lowest,
                      estimate_beta(RewardModel::bernoulli(0.9), f2, schedule,
                                    1000, 1000, pair_seed, 2)
                          .estimate);
  }
  CHECK(min_est.estimate == lowest);
}

TEST_CASE("epoch stats at the minimal horizon are all censored") {
  const ThetaSchedule schedule(11, 2.1);
  const auto b = RewardModel::bernoulli(0.5);
  const auto stats =
      epoch_length_stats(b, b, schedule, Policy::ucb1(), 2, 200, 9, 2);
  CHECK(stats.censored_fraction == 1.0);
  CHECK(stats.mean_tau == 2.0);
}

TEST_CASE("homogeneous epochs terminate quickly") {
  const ThetaSchedule schedule(11, 2.1);
  const auto b = RewardModel::bernoulli(0.5);
  const auto small =
      epoch_length_stats(b, b, schedule, Policy::ucb1(), 10000, 400, 9, 2);
  const auto large =
      epoch_length_stats(b, b, schedule, Policy::ucb1(), 100000, 400, 9, 2);
  CHECK(small.censored_fraction < 0.05);
  CHECK(large.censored_fraction < 0.05);
  CHECK(std::abs(small.mean_tau - large.mean_tau) <= 0.10 * large.mean_tau);
}

TEST_CASE("heterogeneous epochs survive at least as often as beta") {
  const ThetaSchedule schedule(11, 2.1);
  const auto b90 = RewardModel::bernoulli(0.9);
  const auto b50 = RewardModel::bernoulli(0.5);
  const auto est = estimate_beta(b90, b50, schedule, 100000, 2000, 13, 2);
  const auto stats =
      epoch_length_stats(b90, b50, schedule, Policy::ucb1(), 10000, 500, 13, 2);
  const double se_stats =
      std::sqrt(stats.censored_fraction * (1 - stats.censored_fraction) / 500.0);
  CHECK(stats.censored_fraction >=
        est.estimate - 2 * est.std_error - 2 * se_stats);
}

}  // TEST_SUITE
