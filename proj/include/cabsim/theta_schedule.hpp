#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

namespace cabsim {

// Deterministic threshold sequence
//   theta_m = sqrt( m^2 (m+m0)^-1 (4 ln(m+m0) + gamma ln ln(m+m0)) )
// used by the paired-difference test. Natural logarithms throughout.
//
// Construction is strict-domain: m + m0 >= 3 must hold at m = 1 so that
// ln ln(m+m0) is defined and positive, hence m0 >= 2.
class ThetaSchedule {
 public:
  ThetaSchedule(int64_t m0, double gamma);

  double theta(int64_t m) const;

  int64_t m0() const { return m0_; }
  double gamma() const { return gamma_; }

  // theta(1..horizon); slot m holds theta_m, slot 0 is unused.
  std::vector<double> table(int64_t horizon) const;

  nlohmann::json to_json() const;
  static ThetaSchedule from_json(const nlohmann::json& j);

  // Preset used by the countable-armed runs.
  static ThetaSchedule alg_default() { return ThetaSchedule(11, 2.1); }
  // Preset used for beta estimation.
  static ThetaSchedule beta_default() { return ThetaSchedule(4000, 2.1); }

 private:
  int64_t m0_;
  double gamma_;
};

struct ScheduleValidation {
  int64_t horizon = 0;
  bool theta1_below_one = false;
  bool ratio_decreasing = false;  // theta_m/m strictly decreasing on [1, horizon]
  bool nonnegative = false;
  std::optional<int64_t> first_ratio_violation;

  bool accepted() const {
    return theta1_below_one && ratio_decreasing && nonnegative;
  }
};

// Numeric prefix check of the Proposition-1 conditions up to `horizon`.
ScheduleValidation validate_schedule(const ThetaSchedule& schedule,
                                     int64_t horizon);

}  // namespace cabsim
