#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cabsim/policies.hpp"
#include "cabsim/reward_models.hpp"
#include "json.hpp"

namespace cabsim {

// Unbounded (or, with sigma = 0, constant) Gaussian rewards. Permitted only
// for TS policies unless the realized support stays inside [0,1].
struct GaussReward {
  double mu = 0.5;
  double sigma = 1.0;
};

using ZeroGapReward = std::variant<RewardModel, GaussReward>;

double reward_mean(const ZeroGapReward& reward);
bool reward_bounded01(const ZeroGapReward& reward);
double sample(const ZeroGapReward& reward, RngStream& rng);
nlohmann::json reward_to_json(const ZeroGapReward& reward);
ZeroGapReward reward_from_json(const nlohmann::json& j);

struct ZeroGapConfig {
  Policy policy;
  ZeroGapReward reward1 = RewardModel::bernoulli(0.5);
  ZeroGapReward reward2 = RewardModel::bernoulli(0.5);
  int64_t n = 10000;
  int64_t reps = 2000;
  int bins = 100;
  uint64_t seed = 1;
  std::vector<double> epsilons;  // tail table entries
  // Diagnostic: exchange the two arms' reward and posterior-sampling
  // substreams (exchangeability check).
  bool swap_arms = false;
};

struct ZeroGapResult {
  std::string policy_id;
  nlohmann::json reward_spec;
  int64_t n = 0;
  int64_t reps = 0;
  std::vector<double> samples;  // N_1(n)/n per replication
  std::vector<double> bin_edges;
  std::vector<int64_t> bin_counts;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::vector<double> epsilons;
  std::vector<double> tail_freq;

  nlohmann::json summary_json() const;
};

// reps independent n-play runs of the policy on a two-armed zero-gap bandit;
// collects the fraction of plays of arm 1.
ZeroGapResult run_zerogap(const ZeroGapConfig& config, int workers = 1);

struct TailBound {
  double value = 0.0;
  double exponent = 0.0;
  bool vacuous = false;  // exponent <= 0
};

// UCB1 zero-gap tail bound 8 n^-(3 - 4 sqrt(1-4 eps^2)); vacuous for
// eps <= sqrt(7)/8.
TailBound ucb1_tail_bound(int64_t n, double epsilon);

// UCB(rho) generalization: 2^(2 rho - 1) n^-(2 rho - 1 - 2 rho sqrt(1-4 eps^2)).
TailBound generic_ucb_tail_bound(int64_t n, double epsilon, double rho);

// Fraction of samples with |x - 1/2| > epsilon.
double tail_frequency(const ZeroGapResult& result, double epsilon);
double tail_frequency(const std::vector<double>& samples, double epsilon);

}  // namespace cabsim
