#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cabsim/rng.hpp"
#include "json.hpp"

namespace cabsim {

enum class RewardKind { Bernoulli, Beta, Uniform01, TruncGauss };

std::string to_string(RewardKind kind);

// A reward distribution on [0,1] with an analytically known mean.
// The set of kinds is closed so that configurations replay and serialize
// exactly.
class RewardModel {
 public:
  static RewardModel bernoulli(double p);
  static RewardModel beta(double a, double b);
  static RewardModel uniform01();
  // Gaussian N(mu, sigma^2) resampled until the draw lands in [0,1].
  static RewardModel trunc_gauss(double mu, double sigma);

  RewardKind kind() const { return kind_; }
  double mean() const { return mean_; }

  // Assumption 1: support infimum 0 and supremum 1. Holds for every
  // admissible parameterization of the four kinds.
  bool satisfies_assumption1() const { return true; }

  double sample(RngStream& rng) const;

  double param1() const { return p1_; }  // p | a | mu
  double param2() const { return p2_; }  // - | b | sigma

  nlohmann::json to_json() const;
  static RewardModel from_json(const nlohmann::json& j);

  friend bool operator==(const RewardModel& a, const RewardModel& b) {
    return a.kind_ == b.kind_ && a.p1_ == b.p1_ && a.p2_ == b.p2_;
  }

 private:
  RewardModel(RewardKind kind, double p1, double p2, double mean)
      : kind_(kind), p1_(p1), p2_(p2), mean_(mean) {}

  RewardKind kind_;
  double p1_;
  double p2_;
  double mean_;
};

enum class ArmType { Type1, Type2 };  // Type1 is the optimal type

struct Arm {
  uint64_t label = 0;  // creation order, unique within a reservoir
  ArmType arm_type = ArmType::Type1;
  RewardModel model;
};

inline double sample_reward(const Arm& arm, RngStream& rng) {
  return arm.model.sample(rng);
}

// A two-type countable-armed instance: type means, optimal-type proportion
// alpha, and one finite distribution family per type.
class CABInstance {
 public:
  static CABInstance make(double mu1, double mu2, double alpha,
                          std::vector<RewardModel> family1,
                          std::vector<RewardModel> family2);
  // Equal means, permitted only through this constructor.
  static CABInstance zero_gap(double mu, double alpha,
                              std::vector<RewardModel> family1,
                              std::vector<RewardModel> family2);
  // Bernoulli(mu1) / Bernoulli(mu2) singleton families.
  static CABInstance bernoulli(double mu1, double mu2, double alpha);

  double mu1() const { return mu1_; }
  double mu2() const { return mu2_; }
  double alpha() const { return alpha_; }
  double gap() const { return mu1_ - mu2_; }
  bool is_zero_gap() const { return zero_gap_; }

  const std::vector<RewardModel>& family(ArmType type) const {
    return type == ArmType::Type1 ? family1_ : family2_;
  }

  nlohmann::json to_json() const;
  static CABInstance from_json(const nlohmann::json& j);

 private:
  CABInstance() = default;

  double mu1_ = 0;
  double mu2_ = 0;
  double alpha_ = 0;
  bool zero_gap_ = false;
  std::vector<RewardModel> family1_;
  std::vector<RewardModel> family2_;
};

// Lazy infinite arm population: arms materialize only on draw. Labels start
// at 1 and strictly increase per reservoir.
class ArmReservoir {
 public:
  explicit ArmReservoir(CABInstance instance) : instance_(std::move(instance)) {}

  Arm draw(RngStream& rng);

  const CABInstance& instance() const { return instance_; }
  uint64_t arms_drawn() const { return next_label_; }

 private:
  CABInstance instance_;
  uint64_t next_label_ = 0;
};

inline Arm draw_new_arm(ArmReservoir& reservoir, RngStream& rng) {
  return reservoir.draw(rng);
}

}  // namespace cabsim
