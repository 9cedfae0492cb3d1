#include "cabsim/policies.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace cabsim {

namespace {

double parse_suffix(std::string_view id, std::string_view prefix) {
  const std::string_view num = id.substr(prefix.size());
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc{} || ptr != num.data() + num.size()) {
    throw std::invalid_argument("bad numeric suffix in policy id: " + std::string(id));
  }
  return value;
}

}  // namespace

Policy Policy::ucb_rho(double rho) {
  if (!(rho > 0.5)) throw std::invalid_argument("ucb-rho requires rho > 1/2");
  Policy p;
  p.kind = PolicyKind::UcbRho;
  p.rho = rho;
  return p;
}

Policy Policy::ts_gauss(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("ts-gauss requires sigma > 0");
  Policy p;
  p.kind = PolicyKind::TsGauss;
  p.sigma = sigma;
  return p;
}

Policy Policy::parse(std::string_view id) {
  if (id == "ucb1") return ucb1();
  if (id == "ts-beta") return ts_beta();
  if (id == "ts-gauss") return ts_gauss(1.0);
  if (id == "greedy-commit") return greedy_commit();
  if (id.starts_with("ucb-rho:")) return ucb_rho(parse_suffix(id, "ucb-rho:"));
  if (id.starts_with("ts-gauss:")) return ts_gauss(parse_suffix(id, "ts-gauss:"));
  throw std::invalid_argument("unknown policy id: " + std::string(id));
}

std::string Policy::id() const {
  switch (kind) {
    case PolicyKind::Ucb1:
      return "ucb1";
    case PolicyKind::UcbRho:
      return "ucb-rho:" + std::to_string(rho);
    case PolicyKind::TsBeta:
      return "ts-beta";
    case PolicyKind::TsGauss:
      return "ts-gauss:" + std::to_string(sigma);
    case PolicyKind::GreedyCommit:
      return "greedy-commit";
  }
  return "unknown";
}

double ucb_index(const TwoArmState& state, int arm, int64_t t, double rho) {
  if (state.plays[arm] == 0) {
    throw std::domain_error("ucb_index undefined for an unplayed arm");
  }
  return state.mean(arm) +
         std::sqrt(rho * std::log(static_cast<double>(t)) /
                   static_cast<double>(state.plays[arm]));
}

namespace {

int argmax_low_tie(double v0, double v1) { return v1 > v0 ? 1 : 0; }

double ts_beta_sample(const TwoArmState& state, int arm, RngStream& rng) {
  const double a = 1.0 + static_cast<double>(state.successes[arm]);
  const double b =
      1.0 + static_cast<double>(state.plays[arm] - state.successes[arm]);
  return rng.beta(a, b);
}

double ts_gauss_sample(const TwoArmState& state, int arm, double sigma,
                       RngStream& rng) {
  const double mean = state.plays[arm] > 0 ? state.mean(arm) : 0.0;
  const double sd =
      sigma / std::sqrt(static_cast<double>(state.plays[arm] + 1));
  return mean + sd * rng.normal();
}

}  // namespace

int select_arm(const Policy& policy, const TwoArmState& state, int64_t t,
               RngStream& rng0, RngStream& rng1) {
  switch (policy.kind) {
    case PolicyKind::TsBeta:
      return argmax_low_tie(ts_beta_sample(state, 0, rng0),
                            ts_beta_sample(state, 1, rng1));
    case PolicyKind::TsGauss:
      return argmax_low_tie(ts_gauss_sample(state, 0, policy.sigma, rng0),
                            ts_gauss_sample(state, 1, policy.sigma, rng1));
    default:
      break;
  }
  // Index rules: one forced play of each arm first.
  if (state.plays[0] == 0) return 0;
  if (state.plays[1] == 0) return 1;
  if (policy.kind == PolicyKind::GreedyCommit) {
    return argmax_low_tie(state.mean(0), state.mean(1));
  }
  // Index computed on history through t-1.
  const int64_t lt = t - 1;
  return argmax_low_tie(ucb_index(state, 0, lt, policy.rho),
                        ucb_index(state, 1, lt, policy.rho));
}

int select_arm(const Policy& policy, const TwoArmState& state, int64_t t,
               RngStream& rng) {
  return select_arm(policy, state, t, rng, rng);
}

void update(const Policy& policy, TwoArmState& state, int arm, double reward,
            RngStream& rng) {
  if (policy.requires_bounded_rewards() && !(reward >= 0.0 && reward <= 1.0)) {
    throw std::domain_error("reward outside [0,1] for a bounded-reward policy");
  }
  state.plays[arm] += 1;
  state.reward_sum[arm] += reward;
  if (policy.kind == PolicyKind::TsBeta) {
    // Conjugate Bernoulli update; fractional rewards become a coin flip with
    // success probability equal to the reward.
    bool success;
    if (reward == 1.0) {
      success = true;
    } else if (reward == 0.0) {
      success = false;
    } else {
      success = rng.bernoulli(reward);
    }
    if (success) state.successes[arm] += 1;
  }
}

}  // namespace cabsim
