#include "cabsim/theta_schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace cabsim {

ThetaSchedule::ThetaSchedule(int64_t m0, double gamma) : m0_(m0), gamma_(gamma) {
  if (m0 + 1 < 3) {
    throw std::invalid_argument(
        "theta schedule requires m0 >= 2 (ln ln(m+m0) undefined at m=1 "
        "otherwise)");
  }
  if (!(gamma > 2.0)) {
    throw std::invalid_argument("theta schedule requires gamma > 2");
  }
}

double ThetaSchedule::theta(int64_t m) const {
  if (m < 1) throw std::domain_error("theta requires m >= 1");
  const double dm = static_cast<double>(m);
  const double shifted = dm + static_cast<double>(m0_);
  const double lg = std::log(shifted);
  return std::sqrt(dm * dm / shifted * (4.0 * lg + gamma_ * std::log(lg)));
}

std::vector<double> ThetaSchedule::table(int64_t horizon) const {
  if (horizon < 1) throw std::domain_error("table requires horizon >= 1");
  std::vector<double> t(static_cast<size_t>(horizon) + 1, 0.0);
  for (int64_t m = 1; m <= horizon; ++m) {
    t[static_cast<size_t>(m)] = theta(m);
  }
  return t;
}

nlohmann::json ThetaSchedule::to_json() const {
  return {{"m0", m0_}, {"gamma", gamma_}};
}

ThetaSchedule ThetaSchedule::from_json(const nlohmann::json& j) {
  return ThetaSchedule(j.at("m0").get<int64_t>(), j.at("gamma").get<double>());
}

ScheduleValidation validate_schedule(const ThetaSchedule& schedule,
                                     int64_t horizon) {
  if (horizon < 2) throw std::invalid_argument("validation horizon must be >= 2");
  ScheduleValidation report;
  report.horizon = horizon;
  report.theta1_below_one = schedule.theta(1) < 1.0;
  report.ratio_decreasing = true;
  report.nonnegative = true;
  double prev_ratio = schedule.theta(1);
  if (!(prev_ratio >= 0.0)) report.nonnegative = false;
  for (int64_t m = 2; m <= horizon; ++m) {
    const double th = schedule.theta(m);
    if (!(th >= 0.0)) report.nonnegative = false;
    const double ratio = th / static_cast<double>(m);
    if (!(ratio < prev_ratio)) {
      if (report.ratio_decreasing) report.first_ratio_violation = m;
      report.ratio_decreasing = false;
    }
    prev_ratio = ratio;
  }
  return report;
}

}  // namespace cabsim
