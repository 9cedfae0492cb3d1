#include "cabsim/beta_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cabsim/cab_algorithms.hpp"
#include "cabsim/parallel.hpp"

namespace cabsim {

namespace {

std::vector<int64_t> power_checkpoints(int64_t truncation) {
  std::vector<int64_t> cps;
  for (int64_t c = 1; c <= truncation && c > 0; c *= 2) cps.push_back(c);
  if (cps.empty() || cps.back() != truncation) cps.push_back(truncation);
  return cps;
}

}  // namespace

nlohmann::json BetaEstimate::to_json() const {
  return {{"delta", delta},
          {"m0", m0},
          {"gamma", gamma},
          {"M", truncation},
          {"reps", reps},
          {"beta_hat", estimate},
          {"std_error", std_error},
          {"checkpoint_ms", checkpoint_ms},
          {"survival", survival}};
}

int64_t survival_violation_step(const std::function<double()>& next_diff,
                                std::span<const double> theta_table,
                                int64_t truncation) {
  double prefix = 0.0;
  for (int64_t m = 1; m <= truncation; ++m) {
    prefix += next_diff();
    if (std::abs(prefix) < theta_table[static_cast<size_t>(m)]) return m;
  }
  return truncation + 1;
}

namespace {

BetaEstimate estimate_beta_impl(const RewardModel& model1,
                                const RewardModel& model2,
                                const ThetaSchedule& schedule,
                                int64_t truncation, int64_t reps, uint64_t seed,
                                int workers) {
  BetaEstimate out;
  out.delta = model1.mean() - model2.mean();
  out.m0 = schedule.m0();
  out.gamma = schedule.gamma();
  out.truncation = truncation;
  out.reps = reps;
  out.checkpoint_ms = power_checkpoints(truncation);

  const std::vector<double> theta_table = schedule.table(truncation);

  // violation step per rep; aggregation below is order-independent
  std::vector<int64_t> violation(static_cast<size_t>(reps));
  parallel_for(reps, workers, [&](int64_t rep) {
    RngStream rng1 = derive_stream(seed, static_cast<uint64_t>(rep), "beta-y1");
    RngStream rng2 = derive_stream(seed, static_cast<uint64_t>(rep), "beta-y2");
    auto next_diff = [&] { return model1.sample(rng1) - model2.sample(rng2); };
    violation[static_cast<size_t>(rep)] =
        survival_violation_step(next_diff, theta_table, truncation);
  });

  out.survival.assign(out.checkpoint_ms.size(), 0.0);
  int64_t survivors_to_end = 0;
  for (const int64_t v : violation) {
    if (v > truncation) ++survivors_to_end;
    for (size_t c = 0; c < out.checkpoint_ms.size(); ++c) {
      if (v > out.checkpoint_ms[c]) out.survival[c] += 1.0;
    }
  }
  for (auto& s : out.survival) s /= static_cast<double>(reps);
  out.estimate = static_cast<double>(survivors_to_end) / static_cast<double>(reps);
  out.std_error =
      std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(reps));
  return out;
}

}  // namespace

BetaEstimate estimate_beta(const RewardModel& model1, const RewardModel& model2,
                           const ThetaSchedule& schedule, int64_t truncation,
                           int64_t reps, uint64_t seed, int workers,
                           bool allow_zero_gap) {
  if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  const double delta = model1.mean() - model2.mean();
  if (!(delta > 0.0) && !allow_zero_gap) {
    throw std::invalid_argument(
        "estimate_beta requires mean(model1) > mean(model2); zero gap is "
        "diagnostic-only");
  }
  return estimate_beta_impl(model1, model2, schedule, truncation, reps, seed,
                            workers);
}

BetaEstimate estimate_beta_min(const CABInstance& instance,
                               const ThetaSchedule& schedule, int64_t truncation,
                               int64_t reps, uint64_t seed, int workers) {
  if (instance.is_zero_gap()) {
    throw std::invalid_argument("beta is undefined on zero-gap instances");
  }
  BetaEstimate best;
  bool first = true;
  uint64_t pair_index = 0;
  for (const auto& f1 : instance.family(ArmType::Type1)) {
    for (const auto& f2 : instance.family(ArmType::Type2)) {
      // distinct substreams per pair so estimates stay independent
      const uint64_t pair_seed = mix64(seed ^ (0x9e3779b97f4a7c15ULL * ++pair_index));
      BetaEstimate est =
          estimate_beta(f1, f2, schedule, truncation, reps, pair_seed, workers);
      if (first || est.estimate < best.estimate) {
        best = std::move(est);
        first = false;
      }
    }
  }
  return best;
}

BetaEstimate survival_curve(const RewardModel& model1, const RewardModel& model2,
                            const ThetaSchedule& schedule, int64_t truncation,
                            int64_t reps, uint64_t seed, int workers,
                            bool allow_zero_gap) {
  return estimate_beta(model1, model2, schedule, truncation, reps, seed,
                       workers, allow_zero_gap);
}

nlohmann::json EpochLengthStats::to_json() const {
  return {{"reps", reps},
          {"n", horizon},
          {"mean_tau", mean_tau},
          {"censored_fraction", censored_fraction},
          {"q50", q50},
          {"q90", q90},
          {"q99", q99}};
}

EpochLengthStats epoch_length_stats(const RewardModel& model1,
                                    const RewardModel& model2,
                                    const ThetaSchedule& schedule,
                                    const Policy& policy, int64_t n,
                                    int64_t reps, uint64_t seed, int workers) {
  if (n < 2) throw std::invalid_argument("epoch stats require n >= 2");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");

  const std::vector<double> theta_table = schedule.table(n / 2 + 2);
  std::vector<int64_t> tau(static_cast<size_t>(reps));
  std::vector<uint8_t> censored(static_cast<size_t>(reps));

  parallel_for(reps, workers, [&](int64_t rep) {
    RngStream reward_rng =
        derive_stream(seed, static_cast<uint64_t>(rep), "epoch-rewards");
    RngStream policy_rng =
        derive_stream(seed, static_cast<uint64_t>(rep), "epoch-policy");
    auto draw_reward = [&](int arm, int64_t /*k*/) {
      return arm == 0 ? model1.sample(reward_rng) : model2.sample(reward_rng);
    };
    const auto outcome =
        detail::run_theta_epoch(policy, theta_table, n, draw_reward, policy_rng);
    tau[static_cast<size_t>(rep)] = outcome.plays;
    censored[static_cast<size_t>(rep)] = outcome.fired ? 0 : 1;
  });

  EpochLengthStats stats;
  stats.reps = reps;
  stats.horizon = n;
  double sum = 0.0;
  int64_t censored_count = 0;
  for (int64_t i = 0; i < reps; ++i) {
    sum += static_cast<double>(tau[static_cast<size_t>(i)]);
    censored_count += censored[static_cast<size_t>(i)];
  }
  stats.mean_tau = sum / static_cast<double>(reps);
  stats.censored_fraction =
      static_cast<double>(censored_count) / static_cast<double>(reps);

  std::vector<int64_t> sorted = tau;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const auto idx = static_cast<size_t>(
        std::min<double>(static_cast<double>(reps - 1),
                         std::floor(p * static_cast<double>(reps))));
    return static_cast<double>(sorted[idx]);
  };
  stats.q50 = quantile(0.50);
  stats.q90 = quantile(0.90);
  stats.q99 = quantile(0.99);
  return stats;
}

}  // namespace cabsim
