#include "cabsim/zerogap.hpp"

#include <cmath>
#include <stdexcept>

#include "cabsim/parallel.hpp"

namespace cabsim {

double reward_mean(const ZeroGapReward& reward) {
  if (const auto* model = std::get_if<RewardModel>(&reward)) return model->mean();
  return std::get<GaussReward>(reward).mu;
}

bool reward_bounded01(const ZeroGapReward& reward) {
  if (std::holds_alternative<RewardModel>(reward)) return true;
  const auto& g = std::get<GaussReward>(reward);
  return g.sigma == 0.0 && g.mu >= 0.0 && g.mu <= 1.0;
}

double sample(const ZeroGapReward& reward, RngStream& rng) {
  if (const auto* model = std::get_if<RewardModel>(&reward)) {
    return model->sample(rng);
  }
  const auto& g = std::get<GaussReward>(reward);
  return g.sigma == 0.0 ? g.mu : g.mu + g.sigma * rng.normal();
}

nlohmann::json reward_to_json(const ZeroGapReward& reward) {
  if (const auto* model = std::get_if<RewardModel>(&reward)) {
    return model->to_json();
  }
  const auto& g = std::get<GaussReward>(reward);
  return {{"kind", "gauss"}, {"mu", g.mu}, {"sigma", g.sigma}};
}

ZeroGapReward reward_from_json(const nlohmann::json& j) {
  if (j.at("kind").get<std::string>() == "gauss") {
    GaussReward g;
    g.mu = j.at("mu").get<double>();
    g.sigma = j.at("sigma").get<double>();
    if (!(g.sigma >= 0.0)) {
      throw std::invalid_argument("gauss reward requires sigma >= 0");
    }
    return g;
  }
  return RewardModel::from_json(j);
}

nlohmann::json ZeroGapResult::summary_json() const {
  nlohmann::json tail = nlohmann::json::array();
  for (size_t i = 0; i < epsilons.size(); ++i) {
    nlohmann::json row = {{"epsilon", epsilons[i]}, {"empirical", tail_freq[i]}};
    tail.push_back(row);
  }
  return {{"policy", policy_id},
          {"rewards", reward_spec},
          {"n", n},
          {"reps", reps},
          {"mean", mean},
          {"std", stddev},
          {"histogram", {{"bin_edges", bin_edges}, {"counts", bin_counts}}},
          {"tail", tail}};
}

ZeroGapResult run_zerogap(const ZeroGapConfig& config, int workers) {
  if (config.n < 2) throw std::invalid_argument("zerogap requires n >= 2");
  if (config.reps < 1) throw std::invalid_argument("zerogap requires reps >= 1");
  if (config.bins < 1) throw std::invalid_argument("zerogap requires bins >= 1");
  if (std::abs(reward_mean(config.reward1) - reward_mean(config.reward2)) >
      1e-12) {
    throw std::invalid_argument("zero-gap runner requires equal reward means");
  }
  const bool bounded =
      reward_bounded01(config.reward1) && reward_bounded01(config.reward2);
  if (!bounded && config.policy.requires_bounded_rewards()) {
    throw std::invalid_argument(
        "unbounded rewards are permitted only for TS policies");
  }

  ZeroGapResult result;
  result.policy_id = config.policy.id();
  result.reward_spec = nlohmann::json::array(
      {reward_to_json(config.reward1), reward_to_json(config.reward2)});
  result.n = config.n;
  result.reps = config.reps;
  result.samples.assign(static_cast<size_t>(config.reps), 0.0);

  // Arm j reads reward/posterior substreams for slot sigma(j); swapping the
  // slots relabels the arms wholesale.
  const int slot0 = config.swap_arms ? 1 : 0;
  const int slot1 = config.swap_arms ? 0 : 1;

  parallel_for(config.reps, workers, [&](int64_t rep) {
    const auto r = static_cast<uint64_t>(rep);
    std::array<RngStream, 2> reward_rng{
        derive_stream(config.seed, r, slot0 == 0 ? "reward-arm1" : "reward-arm2"),
        derive_stream(config.seed, r, slot1 == 0 ? "reward-arm1" : "reward-arm2")};
    std::array<RngStream, 2> policy_rng{
        derive_stream(config.seed, r, slot0 == 0 ? "policy-arm1" : "policy-arm2"),
        derive_stream(config.seed, r, slot1 == 0 ? "policy-arm1" : "policy-arm2")};
    const std::array<const ZeroGapReward*, 2> rewards{
        config.swap_arms ? &config.reward2 : &config.reward1,
        config.swap_arms ? &config.reward1 : &config.reward2};

    TwoArmState state;
    for (int64_t t = 1; t <= config.n; ++t) {
      const int arm = select_arm(config.policy, state, t, policy_rng[0],
                                 policy_rng[1]);
      const double x = sample(*rewards[arm], reward_rng[static_cast<size_t>(arm)]);
      update(config.policy, state, arm, x, policy_rng[static_cast<size_t>(arm)]);
    }
    result.samples[static_cast<size_t>(rep)] =
        static_cast<double>(state.plays[0]) / static_cast<double>(config.n);
  });

  // histogram on [0,1]
  result.bin_edges.resize(static_cast<size_t>(config.bins) + 1);
  for (int b = 0; b <= config.bins; ++b) {
    result.bin_edges[static_cast<size_t>(b)] =
        static_cast<double>(b) / static_cast<double>(config.bins);
  }
  result.bin_counts.assign(static_cast<size_t>(config.bins), 0);
  double sum = 0.0;
  for (const double x : result.samples) {
    sum += x;
    auto b = static_cast<int64_t>(x * config.bins);
    if (b >= config.bins) b = config.bins - 1;
    if (b < 0) b = 0;
    result.bin_counts[static_cast<size_t>(b)] += 1;
  }
  result.mean = sum / static_cast<double>(config.reps);
  double ss = 0.0;
  for (const double x : result.samples) {
    ss += (x - result.mean) * (x - result.mean);
  }
  result.stddev = config.reps > 1
                      ? std::sqrt(ss / static_cast<double>(config.reps - 1))
                      : 0.0;

  result.epsilons = config.epsilons;
  result.tail_freq.reserve(result.epsilons.size());
  for (const double eps : result.epsilons) {
    result.tail_freq.push_back(tail_frequency(result.samples, eps));
  }
  return result;
}

TailBound ucb1_tail_bound(int64_t n, double epsilon) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("epsilon must lie in (0, 1/2)");
  }
  TailBound bound;
  bound.exponent = 3.0 - 4.0 * std::sqrt(1.0 - 4.0 * epsilon * epsilon);
  bound.vacuous = bound.exponent <= 0.0;
  bound.value = 8.0 * std::pow(static_cast<double>(n), -bound.exponent);
  return bound;
}

TailBound generic_ucb_tail_bound(int64_t n, double epsilon, double rho) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("epsilon must lie in (0, 1/2)");
  }
  if (!(rho > 0.5)) throw std::invalid_argument("rho must exceed 1/2");
  TailBound bound;
  bound.exponent =
      2.0 * rho - 1.0 - 2.0 * rho * std::sqrt(1.0 - 4.0 * epsilon * epsilon);
  bound.vacuous = bound.exponent <= 0.0;
  bound.value = std::pow(2.0, 2.0 * rho - 1.0) *
                std::pow(static_cast<double>(n), -bound.exponent);
  return bound;
}

double tail_frequency(const std::vector<double>& samples, double epsilon) {
  if (samples.empty()) {
    throw std::invalid_argument("tail_frequency requires a nonempty result");
  }
  int64_t count = 0;
  for (const double x : samples) {
    if (std::abs(x - 0.5) > epsilon) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

double tail_frequency(const ZeroGapResult& result, double epsilon) {
  return tail_frequency(result.samples, epsilon);
}

}  // namespace cabsim
