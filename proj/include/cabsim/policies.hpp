#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "cabsim/rng.hpp"

namespace cabsim {

enum class PolicyKind { Ucb1, UcbRho, TsBeta, TsGauss, GreedyCommit };

// A two-armed playing rule. Parsed from string ids:
//   "ucb1" | "ucb-rho:<rho>" | "ts-beta" | "ts-gauss:<sigma>" | "greedy-commit"
struct Policy {
  PolicyKind kind = PolicyKind::Ucb1;
  double rho = 2.0;    // UCB exploration coefficient (> 1/2); 2 is UCB1
  double sigma = 1.0;  // TS-Gauss posterior scale

  static Policy parse(std::string_view id);
  std::string id() const;

  static Policy ucb1() { return Policy{PolicyKind::Ucb1, 2.0, 1.0}; }
  static Policy ucb_rho(double rho);
  static Policy ts_beta() { return Policy{PolicyKind::TsBeta, 2.0, 1.0}; }
  static Policy ts_gauss(double sigma);
  static Policy greedy_commit() { return Policy{PolicyKind::GreedyCommit, 2.0, 1.0}; }

  // UCB and greedy rules play each arm once at t in {1,2} before the index
  // applies; TS rules sample posteriors from the start.
  bool is_index_policy() const { return kind != PolicyKind::TsBeta && kind != PolicyKind::TsGauss; }
  bool requires_bounded_rewards() const { return kind != PolicyKind::TsGauss; }
  bool is_deterministic() const { return is_index_policy(); }
};

// Per-arm sufficient statistics for a two-armed consideration set.
// successes[] tracks the Bernoulli-reduced success count driving the Beta
// posterior: a_i = 1 + successes[i], b_i = 1 + plays[i] - successes[i].
struct TwoArmState {
  std::array<int64_t, 2> plays{0, 0};
  std::array<double, 2> reward_sum{0.0, 0.0};
  std::array<int64_t, 2> successes{0, 0};

  double mean(int arm) const { return reward_sum[arm] / static_cast<double>(plays[arm]); }
  int64_t total_plays() const { return plays[0] + plays[1]; }
  int64_t min_plays() const { return plays[0] < plays[1] ? plays[0] : plays[1]; }
};

// X-bar_arm + sqrt(rho ln t / N_arm). Throws std::domain_error when the arm
// is unplayed; callers pass the history time (t-1 at decision time t).
double ucb_index(const TwoArmState& state, int arm, int64_t t, double rho);

// Select an arm at decision time t (history through t-1). Index policies
// break ties toward the lower label. The two-stream overload draws arm 0's
// posterior sample from rng0 and arm 1's from rng1; the single-stream
// overload draws both from one stream in arm order.
int select_arm(const Policy& policy, const TwoArmState& state, int64_t t,
               RngStream& rng0, RngStream& rng1);
int select_arm(const Policy& policy, const TwoArmState& state, int64_t t,
               RngStream& rng);

// Record a play. Bounded-reward policies reject rewards outside [0,1];
// TS-Beta reduces a fractional reward to a Bernoulli trial via `rng`.
void update(const Policy& policy, TwoArmState& state, int arm, double reward,
            RngStream& rng);

}  // namespace cabsim
