#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cabsim/policies.hpp"
#include "cabsim/reward_models.hpp"
#include "cabsim/theta_schedule.hpp"
#include "json.hpp"

namespace cabsim {

enum class EpochVerdict { DiscardedHomogeneous, Committed, HorizonReached };

std::string to_string(EpochVerdict verdict);
std::string to_string(ArmType type);

struct EpochTrace {
  int64_t epoch_index = 0;  // 1-based
  std::array<uint64_t, 2> arm_labels{0, 0};
  std::array<ArmType, 2> arm_types{ArmType::Type1, ArmType::Type1};
  int64_t length = 0;  // plays consumed by the epoch
  EpochVerdict verdict = EpochVerdict::HorizonReached;
  std::optional<int64_t> test_fired_at_m;

  nlohmann::json to_json() const;
};

// Full per-play trajectories are kept only up to this horizon; larger runs
// record regret at geometric checkpoints.
inline constexpr int64_t kFullTrajectoryLimit = 100000;

// Powers of two up to n, plus n.
std::vector<int64_t> default_checkpoints(int64_t n);

struct RunRecord {
  std::string algo;
  nlohmann::json instance;
  int64_t horizon = 0;
  uint64_t seed = 0;
  std::vector<int64_t> checkpoints;
  std::vector<double> regret_at_checkpoints;
  std::vector<double> full_trajectory;  // empty when horizon > kFullTrajectoryLimit
  std::vector<EpochTrace> epochs;
  int64_t plays_on_type2 = 0;
  std::optional<ArmType> committed_arm_type;
  double final_regret = 0.0;

  nlohmann::json to_json() const;
};

// Exploration length of Algorithm 1: L = ceil(2 delta^-2 ln n).
int64_t etc_exploration_length(int64_t n, double delta);

// ETC over fresh pairs. Epochs of paired exploration with
// m = min(L, T/2) plays per arm; |sum of paired differences| < delta*m
// discards the pair, otherwise the remaining budget commits to the
// empirical-mean winner. Total plays are exactly n. An empty `checkpoints`
// means powers of two plus n.
RunRecord run_etc(const CABInstance& instance, int64_t n, double delta,
                  RngStream& rng, uint64_t seed_label = 0,
                  std::vector<int64_t> checkpoints = {});

// Adaptive epoch framework. Epochs play both arms once, then gate each
// further play on the paired test at m = min_i N_i; a firing test discards
// the pair and a fresh epoch begins. Truncates mid-epoch at play n.
RunRecord run_alg(const CABInstance& instance, int64_t n, const Policy& policy,
                  const ThetaSchedule& schedule, RngStream& rng,
                  uint64_t seed_label = 0, std::vector<int64_t> checkpoints = {});

enum class TestOutcome { Fire, Survive };

// diff_prefix_sums[k-1] = sum_{j<=k} (X_{1,j} - X_{2,j}). Fires iff
// |prefix_sum(m)| < theta_m.
TestOutcome paired_test(std::span<const double> diff_prefix_sums, int64_t m,
                        const ThetaSchedule& schedule);

// ---- closed-form reference bounds ----

struct EtcBound {
  double value = 0.0;
  // set when the gap*n branch was forced (delta >= gap makes f undefined,
  // or n == 1)
  bool linear_branch = false;
};

// ETC regret bound: min( gap*n,
//   2 gap (1 + 1/(2 alpha)) ((2/delta^2) ln n + 1) + (gap/alpha)(2 + f) )
// with f = (n^-q / (1 - n^-q)) ((2/delta^2) ln n + 3), q = ((gap-delta)/delta)^2.
EtcBound etc_regret_bound(int64_t n, double delta, double gap, double alpha);

// C1 = 1 + pi^2/3
double alg_bound_c1();

// Countable-armed UCB regret bound:
//   min( gap*n, 8 ln n / (gap*beta) + (C1 + c2/alpha) gap/beta ).
// c2 has no closed form and is caller-supplied.
double alg_regret_bound(int64_t n, double gap, double alpha, double beta,
                        double c2);

// Lower-bound reference curve C ln n / gap. The asymptotic constant from the
// change-of-measure argument corresponds to C = 1/2.
inline constexpr double kLowerBoundAsymptoticC = 0.5;
double lower_bound_curve(int64_t n, double gap, double c);

// ---- Lemma-1 pathwise check ----

struct Lemma1Result {
  bool equal = false;
  bool adaptive_fired = false;
  int64_t tau = 0;        // terminal play time of the adaptive epoch (when fired)
  int64_t m_at_fire = 0;  // min_i N_i(tau) (when fired)
  int64_t pairs_observed = 0;  // min_i N_i at the horizon when censored
  bool paired_fired = false;
  int64_t tau_prime = 0;  // first m with |prefix_sum(m)| < theta_m (when fired)

  nlohmann::json to_json() const;
};

// Runs one UCB1-driven epoch on pre-generated reward streams (truncated at n
// plays) and independently computes the i.i.d.-paired stopping time on the
// same streams. Equality means min_i N_i(tau) = tau', with censoring at the
// horizon matched on both sides.
Lemma1Result check_lemma1_on_streams(std::span<const double> stream1,
                                     std::span<const double> stream2, int64_t n,
                                     const ThetaSchedule& schedule);

Lemma1Result check_lemma1_equality(const RewardModel& model1,
                                   const RewardModel& model2, int64_t n,
                                   const ThetaSchedule& schedule, uint64_t seed);

namespace detail {

struct EpochResult {
  int64_t plays = 0;
  bool fired = false;
  int64_t m_at_fire = 0;
  int64_t min_plays = 0;
  TwoArmState state;
};

// One epoch of the theta-test framework. draw_reward(arm, k) supplies arm's
// k-th reward (1-based) and is where callers do their own bookkeeping.
// theta_table[m] must be valid for every m that can arise
// (m <= max_plays/2 + 1).
EpochResult run_theta_epoch(const Policy& policy,
                            std::span<const double> theta_table,
                            int64_t max_plays,
                            const std::function<double(int, int64_t)>& draw_reward,
                            RngStream& policy_rng);

}  // namespace detail

}  // namespace cabsim
