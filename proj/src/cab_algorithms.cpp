#include "cabsim/cab_algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cabsim {

std::string to_string(EpochVerdict verdict) {
  switch (verdict) {
    case EpochVerdict::DiscardedHomogeneous:
      return "discarded_homogeneous";
    case EpochVerdict::Committed:
      return "committed";
    case EpochVerdict::HorizonReached:
      return "horizon_reached";
  }
  return "unknown";
}

std::string to_string(ArmType type) {
  return type == ArmType::Type1 ? "type1" : "type2";
}

nlohmann::json EpochTrace::to_json() const {
  nlohmann::json j = {{"epoch", epoch_index},
                      {"arm_labels", arm_labels},
                      {"arm_types", {to_string(arm_types[0]), to_string(arm_types[1])}},
                      {"length", length},
                      {"verdict", to_string(verdict)}};
  if (test_fired_at_m) j["test_fired_at_m"] = *test_fired_at_m;
  return j;
}

std::vector<int64_t> default_checkpoints(int64_t n) {
  std::vector<int64_t> cps;
  for (int64_t c = 1; c <= n && c > 0; c *= 2) cps.push_back(c);
  if (cps.empty() || cps.back() != n) cps.push_back(n);
  return cps;
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const auto& e : epochs) epochs_json.push_back(e.to_json());
  nlohmann::json j = {{"algo", algo},
                      {"instance", instance},
                      {"n", horizon},
                      {"seed", seed},
                      {"checkpoints", checkpoints},
                      {"regret_at_checkpoints", regret_at_checkpoints},
                      {"epochs", epochs_json},
                      {"epochs_count", static_cast<int64_t>(epochs.size())},
                      {"plays_on_type2", plays_on_type2},
                      {"final_regret", final_regret}};
  if (!full_trajectory.empty()) j["pseudo_regret_trajectory"] = full_trajectory;
  if (committed_arm_type) j["committed_arm_type"] = to_string(*committed_arm_type);
  return j;
}

namespace {

// Per-play pseudo-regret bookkeeping shared by both algorithms.
class RegretTracker {
 public:
  RegretTracker(int64_t n, double gap, std::vector<int64_t> checkpoints)
      : horizon_(n),
        gap_(gap),
        checkpoints_(checkpoints.empty() ? default_checkpoints(n)
                                         : std::move(checkpoints)),
        keep_full_(n <= kFullTrajectoryLimit) {
    int64_t prev = 0;
    for (const int64_t c : checkpoints_) {
      if (c <= prev || c > n) {
        throw std::invalid_argument(
            "checkpoints must be strictly increasing and within the horizon");
      }
      prev = c;
    }
    regret_at_checkpoints_.reserve(checkpoints_.size());
    if (keep_full_) full_.reserve(static_cast<size_t>(n));
  }

  void on_play(ArmType type) {
    ++plays_;
    if (type == ArmType::Type2) {
      regret_ += gap_;
      ++plays_on_type2_;
    }
    if (keep_full_) full_.push_back(regret_);
    if (next_checkpoint_ < checkpoints_.size() &&
        plays_ == checkpoints_[next_checkpoint_]) {
      regret_at_checkpoints_.push_back(regret_);
      ++next_checkpoint_;
    }
  }

  int64_t plays() const { return plays_; }

  void finish(RunRecord& record) && {
    record.horizon = horizon_;
    record.checkpoints = checkpoints_;
    record.regret_at_checkpoints = std::move(regret_at_checkpoints_);
    record.full_trajectory = std::move(full_);
    record.plays_on_type2 = plays_on_type2_;
    record.final_regret = regret_;
  }

 private:
  int64_t horizon_;
  double gap_;
  std::vector<int64_t> checkpoints_;
  bool keep_full_;
  int64_t plays_ = 0;
  int64_t plays_on_type2_ = 0;
  double regret_ = 0.0;
  std::vector<double> full_;
  std::vector<double> regret_at_checkpoints_;
  size_t next_checkpoint_ = 0;
};

}  // namespace

int64_t etc_exploration_length(int64_t n, double delta) {
  if (n < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return static_cast<int64_t>(
      std::ceil(2.0 / (delta * delta) * std::log(static_cast<double>(n))));
}

RunRecord run_etc(const CABInstance& instance, int64_t n, double delta,
                  RngStream& rng, uint64_t seed_label,
                  std::vector<int64_t> checkpoints) {
  if (n < 2) throw std::invalid_argument("run_etc requires n >= 2");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (delta > 1.0) {
    throw std::invalid_argument(
        "delta > 1 makes the test fire on every pair of [0,1] reward streams");
  }

  const int64_t explore_len = etc_exploration_length(n, delta);
  ArmReservoir reservoir(instance);
  RegretTracker tracker(n, instance.gap(), std::move(checkpoints));

  RunRecord record;
  record.algo = "etc";
  record.instance = instance.to_json();
  record.seed = seed_label;

  int64_t budget = n;
  int64_t epoch_index = 0;
  while (budget > 0) {
    ++epoch_index;
    Arm arm1 = reservoir.draw(rng);
    Arm arm2 = reservoir.draw(rng);
    EpochTrace trace;
    trace.epoch_index = epoch_index;
    trace.arm_labels = {arm1.label, arm2.label};
    trace.arm_types = {arm1.arm_type, arm2.arm_type};

    if (budget == 1) {
      // Residual single play lands on the first arm of the fresh pair.
      tracker.on_play(arm1.arm_type);
      arm1.model.sample(rng);
      budget = 0;
      trace.length = 1;
      trace.verdict = EpochVerdict::HorizonReached;
      record.epochs.push_back(trace);
      break;
    }

    const int64_t m = std::min(explore_len, budget / 2);
    double sum1 = 0.0;
    double sum2 = 0.0;
    for (int64_t j = 0; j < m; ++j) {
      tracker.on_play(arm1.arm_type);
      sum1 += sample_reward(arm1, rng);
    }
    for (int64_t j = 0; j < m; ++j) {
      tracker.on_play(arm2.arm_type);
      sum2 += sample_reward(arm2, rng);
    }
    budget -= 2 * m;
    trace.length = 2 * m;

    if (std::abs(sum1 - sum2) < delta * static_cast<double>(m)) {
      trace.verdict = EpochVerdict::DiscardedHomogeneous;
      trace.test_fired_at_m = m;
      record.epochs.push_back(trace);
      continue;
    }

    const Arm& winner = sum1 >= sum2 ? arm1 : arm2;
    for (int64_t j = 0; j < budget; ++j) {
      tracker.on_play(winner.arm_type);
      sample_reward(winner, rng);
    }
    trace.length += budget;
    trace.verdict = EpochVerdict::Committed;
    record.committed_arm_type = winner.arm_type;
    record.epochs.push_back(trace);
    budget = 0;
  }

  std::move(tracker).finish(record);
  return record;
}

namespace detail {

EpochResult run_theta_epoch(const Policy& policy,
                            std::span<const double> theta_table,
                            int64_t max_plays,
                            const std::function<double(int, int64_t)>& draw_reward,
                            RngStream& policy_rng) {
  EpochResult res;
  if (max_plays <= 0) return res;

  std::array<std::vector<double>, 2> rewards;
  std::vector<double> diff_prefix;  // diff_prefix[m], slot 0 = 0
  diff_prefix.push_back(0.0);

  auto play = [&](int arm) {
    const double x = draw_reward(arm, res.state.plays[arm] + 1);
    rewards[arm].push_back(x);
    update(policy, res.state, arm, x, policy_rng);
    ++res.plays;
  };

  play(0);
  if (res.plays < max_plays) play(1);

  int64_t m = res.state.min_plays();
  int64_t tested_up_to = 0;
  while (res.plays < max_plays) {
    if (m > tested_up_to) {
      while (static_cast<int64_t>(diff_prefix.size()) <= m) {
        const size_t k = diff_prefix.size();
        diff_prefix.push_back(diff_prefix.back() + rewards[0][k - 1] -
                              rewards[1][k - 1]);
      }
      tested_up_to = m;
      if (std::abs(diff_prefix[static_cast<size_t>(m)]) <
          theta_table[static_cast<size_t>(m)]) {
        res.fired = true;
        res.m_at_fire = m;
        break;
      }
    }
    const int arm =
        select_arm(policy, res.state, res.state.total_plays() + 1, policy_rng);
    play(arm);
    m = res.state.min_plays();
  }
  res.min_plays = res.state.min_plays();
  return res;
}

}  // namespace detail

RunRecord run_alg(const CABInstance& instance, int64_t n, const Policy& policy,
                  const ThetaSchedule& schedule, RngStream& rng,
                  uint64_t seed_label, std::vector<int64_t> checkpoints) {
  if (n < 2) throw std::invalid_argument("run_alg requires n >= 2");
  // The run consumes thresholds up to m = n/2 + 1; validate that prefix.
  const auto validation = validate_schedule(schedule, n / 2 + 2);
  if (!validation.accepted()) {
    throw std::invalid_argument("theta schedule rejected by validation");
  }

  const std::vector<double> theta_table = schedule.table(n / 2 + 2);
  ArmReservoir reservoir(instance);
  RegretTracker tracker(n, instance.gap(), std::move(checkpoints));

  RunRecord record;
  record.algo = "alg:" + policy.id();
  record.instance = instance.to_json();
  record.seed = seed_label;

  int64_t epoch_index = 0;
  while (tracker.plays() < n) {
    ++epoch_index;
    Arm arm1 = reservoir.draw(rng);
    Arm arm2 = reservoir.draw(rng);
    const std::array<const Arm*, 2> arms{&arm1, &arm2};

    auto draw_reward = [&](int arm, int64_t /*k*/) {
      tracker.on_play(arms[arm]->arm_type);
      return arms[arm]->model.sample(rng);
    };

    const auto outcome = detail::run_theta_epoch(
        policy, theta_table, n - tracker.plays(), draw_reward, rng);

    EpochTrace trace;
    trace.epoch_index = epoch_index;
    trace.arm_labels = {arm1.label, arm2.label};
    trace.arm_types = {arm1.arm_type, arm2.arm_type};
    trace.length = outcome.plays;
    if (outcome.fired) {
      trace.verdict = EpochVerdict::DiscardedHomogeneous;
      trace.test_fired_at_m = outcome.m_at_fire;
    } else {
      trace.verdict = EpochVerdict::HorizonReached;
    }
    record.epochs.push_back(trace);
  }

  std::move(tracker).finish(record);
  return record;
}

TestOutcome paired_test(std::span<const double> diff_prefix_sums, int64_t m,
                        const ThetaSchedule& schedule) {
  if (m < 1 || m > static_cast<int64_t>(diff_prefix_sums.size())) {
    throw std::out_of_range("paired_test: m outside the available prefix");
  }
  const double stat = std::abs(diff_prefix_sums[static_cast<size_t>(m - 1)]);
  return stat < schedule.theta(m) ? TestOutcome::Fire : TestOutcome::Survive;
}

EtcBound etc_regret_bound(int64_t n, double delta, double gap, double alpha) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1]");
  }
  const double linear = gap * static_cast<double>(n);
  if (delta >= gap || n == 1) return {linear, true};

  const double ln_n = std::log(static_cast<double>(n));
  const double q = std::pow((gap - delta) / delta, 2.0);
  const double nq = std::pow(static_cast<double>(n), -q);
  const double f = nq / (1.0 - nq) * (2.0 / (delta * delta) * ln_n + 3.0);
  const double main = 2.0 * gap * (1.0 + 1.0 / (2.0 * alpha)) *
                          (2.0 / (delta * delta) * ln_n + 1.0) +
                      gap / alpha * (2.0 + f);
  return {std::min(linear, main), false};
}

double alg_bound_c1() { return 1.0 + std::numbers::pi * std::numbers::pi / 3.0; }

double alg_regret_bound(int64_t n, double gap, double alpha, double beta,
                        double c2) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1]");
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("beta must lie in (0,1]");
  }
  if (!(c2 >= 0.0)) throw std::invalid_argument("c2 must be nonnegative");
  const double linear = gap * static_cast<double>(n);
  const double main =
      8.0 * std::log(static_cast<double>(n)) / (gap * beta) +
      (alg_bound_c1() + c2 / alpha) * gap / beta;
  return std::min(linear, main);
}

double lower_bound_curve(int64_t n, double gap, double c) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(gap > 0.0)) throw std::invalid_argument("gap must be positive");
  return c * std::log(static_cast<double>(n)) / gap;
}

nlohmann::json Lemma1Result::to_json() const {
  return {{"equal", equal},
          {"adaptive_fired", adaptive_fired},
          {"tau", tau},
          {"m_at_fire", m_at_fire},
          {"pairs_observed", pairs_observed},
          {"paired_fired", paired_fired},
          {"tau_prime", tau_prime}};
}

Lemma1Result check_lemma1_on_streams(std::span<const double> stream1,
                                     std::span<const double> stream2, int64_t n,
                                     const ThetaSchedule& schedule) {
  if (n < 2) throw std::invalid_argument("lemma1 check requires n >= 2");
  if (static_cast<int64_t>(stream1.size()) < n ||
      static_cast<int64_t>(stream2.size()) < n) {
    throw std::invalid_argument("reward streams shorter than the horizon");
  }

  const std::vector<double> theta_table = schedule.table(n / 2 + 2);
  Lemma1Result res;

  // Adaptive side: one UCB1 epoch, the statistic evaluated after each play
  // at m = min_i N_i (only new m values can change the outcome).
  const Policy ucb1 = Policy::ucb1();
  RngStream unused(0);
  TwoArmState state;
  std::vector<double> diff_prefix{0.0};
  int64_t tested_up_to = 0;
  for (int64_t t = 1; t <= n && !res.adaptive_fired; ++t) {
    const int arm = select_arm(ucb1, state, t, unused);
    const double x = arm == 0 ? stream1[static_cast<size_t>(state.plays[0])]
                              : stream2[static_cast<size_t>(state.plays[1])];
    update(ucb1, state, arm, x, unused);
    const int64_t m = state.min_plays();
    if (m > tested_up_to) {
      while (static_cast<int64_t>(diff_prefix.size()) <= m) {
        const size_t k = diff_prefix.size();
        diff_prefix.push_back(diff_prefix.back() +
                              stream1[k - 1] - stream2[k - 1]);
      }
      tested_up_to = m;
      if (std::abs(diff_prefix[static_cast<size_t>(m)]) <
          theta_table[static_cast<size_t>(m)]) {
        res.adaptive_fired = true;
        res.tau = t;
        res.m_at_fire = m;
      }
    }
  }
  res.pairs_observed = res.adaptive_fired ? res.m_at_fire : state.min_plays();

  // Paired side: tau' on the same streams.
  const std::vector<double> theta_full = schedule.table(n);
  double prefix = 0.0;
  for (int64_t m = 1; m <= n; ++m) {
    prefix += stream1[static_cast<size_t>(m - 1)] -
              stream2[static_cast<size_t>(m - 1)];
    if (std::abs(prefix) < theta_full[static_cast<size_t>(m)]) {
      res.paired_fired = true;
      res.tau_prime = m;
      break;
    }
  }

  if (res.adaptive_fired) {
    res.equal = res.paired_fired && res.tau_prime == res.m_at_fire;
  } else {
    // Censored runs agree when the paired walk also survives every pairing
    // the adaptive run observed.
    res.equal = !res.paired_fired || res.tau_prime > res.pairs_observed;
  }
  return res;
}

Lemma1Result check_lemma1_equality(const RewardModel& model1,
                                   const RewardModel& model2, int64_t n,
                                   const ThetaSchedule& schedule,
                                   uint64_t seed) {
  RngStream rng1 = derive_stream(seed, 0, "lemma1-arm1");
  RngStream rng2 = derive_stream(seed, 0, "lemma1-arm2");
  std::vector<double> stream1(static_cast<size_t>(n));
  std::vector<double> stream2(static_cast<size_t>(n));
  for (auto& x : stream1) x = model1.sample(rng1);
  for (auto& x : stream2) x = model2.sample(rng2);
  return check_lemma1_on_streams(stream1, stream2, n, schedule);
}

}  // namespace cabsim
