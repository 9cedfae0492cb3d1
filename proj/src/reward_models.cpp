#include "cabsim/reward_models.hpp"

#include <cmath>
#include <stdexcept>

namespace cabsim {

namespace {

constexpr double kMeanTolerance = 1e-12;

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Mean of N(mu, sigma^2) conditioned on [0,1].
double trunc_gauss_mean(double mu, double sigma) {
  const double a = (0.0 - mu) / sigma;
  const double b = (1.0 - mu) / sigma;
  const double z = normal_cdf(b) - normal_cdf(a);
  return mu + sigma * (normal_pdf(a) - normal_pdf(b)) / z;
}

}  // namespace

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::Bernoulli:
      return "bernoulli";
    case RewardKind::Beta:
      return "beta";
    case RewardKind::Uniform01:
      return "uniform01";
    case RewardKind::TruncGauss:
      return "truncgauss";
  }
  return "unknown";
}

RewardModel RewardModel::bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("bernoulli reward requires p in (0,1)");
  }
  return RewardModel(RewardKind::Bernoulli, p, 0.0, p);
}

RewardModel RewardModel::beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) {
    throw std::invalid_argument("beta reward requires a,b > 0");
  }
  return RewardModel(RewardKind::Beta, a, b, a / (a + b));
}

RewardModel RewardModel::uniform01() {
  return RewardModel(RewardKind::Uniform01, 0.0, 0.0, 0.5);
}

RewardModel RewardModel::trunc_gauss(double mu, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("truncgauss reward requires sigma > 0");
  }
  if (!std::isfinite(mu)) {
    throw std::invalid_argument("truncgauss reward requires finite mu");
  }
  return RewardModel(RewardKind::TruncGauss, mu, sigma,
                     trunc_gauss_mean(mu, sigma));
}

double RewardModel::sample(RngStream& rng) const {
  switch (kind_) {
    case RewardKind::Bernoulli:
      return rng.bernoulli(p1_) ? 1.0 : 0.0;
    case RewardKind::Beta:
      return rng.beta(p1_, p2_);
    case RewardKind::Uniform01:
      return rng.uniform01();
    case RewardKind::TruncGauss: {
      for (;;) {
        const double x = p1_ + p2_ * rng.normal();
        if (x >= 0.0 && x <= 1.0) return x;
      }
    }
  }
  return 0.0;
}

nlohmann::json RewardModel::to_json() const {
  switch (kind_) {
    case RewardKind::Bernoulli:
      return {{"kind", "bernoulli"}, {"p", p1_}};
    case RewardKind::Beta:
      return {{"kind", "beta"}, {"a", p1_}, {"b", p2_}};
    case RewardKind::Uniform01:
      return {{"kind", "uniform01"}};
    case RewardKind::TruncGauss:
      return {{"kind", "truncgauss"}, {"mu", p1_}, {"sigma", p2_}};
  }
  return {};
}

RewardModel RewardModel::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bernoulli") return bernoulli(j.at("p").get<double>());
  if (kind == "beta") {
    return beta(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (kind == "uniform01") return uniform01();
  if (kind == "truncgauss") {
    return trunc_gauss(j.at("mu").get<double>(), j.at("sigma").get<double>());
  }
  throw std::invalid_argument("unknown reward kind: " + kind);
}

namespace {

void check_family(const std::vector<RewardModel>& family, double mu,
                  const char* name) {
  if (family.empty()) {
    throw std::invalid_argument(std::string(name) + " must be nonempty");
  }
  for (const auto& model : family) {
    if (std::abs(model.mean() - mu) > kMeanTolerance) {
      throw std::invalid_argument(std::string(name) +
                                  " contains a model whose mean differs from "
                                  "the type mean");
    }
  }
}

}  // namespace

CABInstance CABInstance::make(double mu1, double mu2, double alpha,
                              std::vector<RewardModel> family1,
                              std::vector<RewardModel> family2) {
  if (!(mu1 > 0.0 && mu1 < 1.0 && mu2 > 0.0 && mu2 < 1.0)) {
    throw std::invalid_argument("type means must lie in (0,1)");
  }
  if (!(mu1 > mu2)) {
    throw std::invalid_argument(
        "mu1 must exceed mu2 (use zero_gap for equal means)");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0,1]");
  }
  check_family(family1, mu1, "family1");
  check_family(family2, mu2, "family2");
  CABInstance inst;
  inst.mu1_ = mu1;
  inst.mu2_ = mu2;
  inst.alpha_ = alpha;
  inst.family1_ = std::move(family1);
  inst.family2_ = std::move(family2);
  return inst;
}

CABInstance CABInstance::zero_gap(double mu, double alpha,
                                  std::vector<RewardModel> family1,
                                  std::vector<RewardModel> family2) {
  if (!(mu > 0.0 && mu < 1.0)) {
    throw std::invalid_argument("type mean must lie in (0,1)");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0,1]");
  }
  check_family(family1, mu, "family1");
  check_family(family2, mu, "family2");
  CABInstance inst;
  inst.mu1_ = mu;
  inst.mu2_ = mu;
  inst.alpha_ = alpha;
  inst.zero_gap_ = true;
  inst.family1_ = std::move(family1);
  inst.family2_ = std::move(family2);
  return inst;
}

CABInstance CABInstance::bernoulli(double mu1, double mu2, double alpha) {
  return make(mu1, mu2, alpha, {RewardModel::bernoulli(mu1)},
              {RewardModel::bernoulli(mu2)});
}

nlohmann::json CABInstance::to_json() const {
  nlohmann::json fam1 = nlohmann::json::array();
  for (const auto& m : family1_) fam1.push_back(m.to_json());
  nlohmann::json fam2 = nlohmann::json::array();
  for (const auto& m : family2_) fam2.push_back(m.to_json());
  return {{"mu1", mu1_},
          {"mu2", mu2_},
          {"alpha", alpha_},
          {"family1", fam1},
          {"family2", fam2}};
}

CABInstance CABInstance::from_json(const nlohmann::json& j) {
  std::vector<RewardModel> fam1;
  for (const auto& m : j.at("family1")) fam1.push_back(RewardModel::from_json(m));
  std::vector<RewardModel> fam2;
  for (const auto& m : j.at("family2")) fam2.push_back(RewardModel::from_json(m));
  const double mu1 = j.at("mu1").get<double>();
  const double mu2 = j.at("mu2").get<double>();
  const double alpha = j.at("alpha").get<double>();
  if (mu1 == mu2) return zero_gap(mu1, alpha, std::move(fam1), std::move(fam2));
  return make(mu1, mu2, alpha, std::move(fam1), std::move(fam2));
}

Arm ArmReservoir::draw(RngStream& rng) {
  // Two draws per arm regardless of family size, so the stream layout does
  // not depend on the instance.
  const bool optimal = rng.bernoulli(instance_.alpha());
  const ArmType type = optimal ? ArmType::Type1 : ArmType::Type2;
  const auto& family = instance_.family(type);
  const uint64_t idx = rng.uniform_index(family.size());
  ++next_label_;
  return Arm{next_label_, type, family[idx]};
}

}  // namespace cabsim
