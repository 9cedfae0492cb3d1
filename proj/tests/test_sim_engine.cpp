#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cabsim/sim_engine.hpp"
#include "doctest.h"

using namespace cabsim;

namespace {

ExperimentConfig etc_config(int64_t n, int64_t reps, uint64_t seed) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::EtcRegret;
  cfg.n = n;
  cfg.reps = reps;
  cfg.master_seed = seed;
  cfg.instance = CABInstance::bernoulli(0.9, 0.5, 0.5).to_json();
  cfg.delta = 0.3;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const char* name)
      : path(std::string("/tmp/cabsim_test_") + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("sim-engine") {

TEST_CASE("derived substreams replay and are pairwise decorrelated") {
  RngStream a = derive_stream(1, 0, "arm");
  RngStream b = derive_stream(1, 0, "arm");
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());

  RngStream c = derive_stream(1, 1, "arm");
  RngStream d = derive_stream(1, 0, "arm");
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    if (c.next() == d.next()) ++same;
  }
  CHECK(same == 0);

  // correlation of paired first draws across substreams
  const int reps = 10000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < reps; ++i) {
    const double x = derive_stream(9, static_cast<uint64_t>(i), "a").uniform01();
    const double y = derive_stream(9, static_cast<uint64_t>(i), "b").uniform01();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double n = reps;
  const double corr = (sxy - sx * sy / n) /
                      std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
  CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("config json round trips bit-exactly") {
  auto cfg = etc_config(1000, 10, 3);
  cfg.epsilons = {0.4, 0.45};
  cfg.bound_beta = 0.4;
  const auto j = cfg.to_json();
  const auto back = ExperimentConfig::from_json(j);
  CHECK(back.to_json().dump() == j.dump());
  CHECK(back.hash() == cfg.hash());

  ExperimentConfig zg;
  zg.kind = ExperimentKind::ZeroGap;
  zg.policy = "ts-beta";
  zg.reward1 = nlohmann::json{{"kind", "gauss"}, {"mu", 0.5}, {"sigma", 1.5}};
  zg.reward2 = nlohmann::json{{"kind", "gauss"}, {"mu", 0.5}, {"sigma", 1.5}};
  zg.swap_arms = true;
  const auto j2 = zg.to_json();
  CHECK(ExperimentConfig::from_json(j2).to_json().dump() == j2.dump());
}

TEST_CASE("worker count never changes the aggregate") {
  auto etc = etc_config(1000, 16, 5);
  const auto r1 = run_batch(etc, 1);
  const auto r4 = run_batch(etc, 4);
  CHECK(r1.to_json().dump() == r4.to_json().dump());

  ExperimentConfig beta;
  beta.kind = ExperimentKind::Beta;
  beta.reps = 300;
  beta.truncation = 500;
  beta.master_seed = 2;
  beta.model1 = RewardModel::bernoulli(0.9).to_json();
  beta.model2 = RewardModel::bernoulli(0.5).to_json();
  beta.schedule = ThetaSchedule(4000, 2.1).to_json();
  CHECK(run_batch(beta, 1).to_json().dump() ==
        run_batch(beta, 3).to_json().dump());

  ExperimentConfig zg;
  zg.kind = ExperimentKind::ZeroGap;
  zg.n = 500;
  zg.reps = 40;
  zg.master_seed = 7;
  zg.policy = "ts-beta";
  CHECK(run_batch(zg, 1).to_json().dump() == run_batch(zg, 4).to_json().dump());
}

TEST_CASE("zero replications produce an empty aggregate") {
  auto cfg = etc_config(1000, 0, 5);
  const auto result = run_batch(cfg, 2);
  CHECK(result.rows.empty());
  CHECK(result.payload.is_null());
  CHECK(result_to_csv(result).empty());
}

TEST_CASE("csv headers match the documented schemas") {
  auto etc = etc_config(8, 3, 5);
  const auto result = run_batch(etc, 1);
  const std::string csv = result_to_csv(result);
  CHECK(csv.rfind("algo,seed,n,alpha,mu1,mu2,delta_or_m0_gamma,regret_at_1,"
                  "regret_at_2,regret_at_4,regret_at_8,epochs_count,"
                  "plays_on_type2\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows

  ExperimentConfig zg;
  zg.kind = ExperimentKind::ZeroGap;
  zg.n = 100;
  zg.reps = 2;
  zg.policy = "ucb1";
  const std::string zg_csv = result_to_csv(run_batch(zg, 1));
  CHECK(zg_csv.rfind("policy,seed,n,N1_over_n\n", 0) == 0);

  ExperimentConfig beta;
  beta.kind = ExperimentKind::Beta;
  beta.reps = 50;
  beta.truncation = 64;
  beta.model1 = RewardModel::bernoulli(0.9).to_json();
  beta.model2 = RewardModel::bernoulli(0.5).to_json();
  const std::string beta_csv = result_to_csv(run_batch(beta, 1));
  CHECK(beta_csv.rfind(
            "delta,m0,gamma,M,reps,beta_hat,std_error,checkpoint_m,"
            "survival_prob\n",
            0) == 0);
}

TEST_CASE("exports are byte-stable and reparsable") {
  auto cfg = etc_config(500, 5, 9);
  const auto result = run_batch(cfg, 2);
  TempFile f1("a.json");
  TempFile f2("b.json");
  export_result(result, "json", f1.path);
  export_result(result, "json", f2.path);
  const std::string body1 = slurp(f1.path);
  CHECK(body1 == slurp(f2.path));
  const auto parsed = nlohmann::json::parse(body1);
  CHECK(parsed == result.to_json());
  CHECK(parsed.at("config_hash").get<uint64_t>() == cfg.hash());

  TempFile c1("a.csv");
  export_result(result, "csv", c1.path);
  CHECK(slurp(c1.path) == result_to_csv(result));

  CHECK_THROWS_AS(export_result(result, "yaml", "/tmp/x"), std::invalid_argument);
  CHECK_THROWS_AS(export_result(result, "json", "/nonexistent-dir-xyz/out"),
                  std::runtime_error);
}

TEST_CASE("lemma1 batches tally equality") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Lemma1;
  cfg.n = 5000;
  cfg.reps = 20;
  cfg.master_seed = 3;
  cfg.model1 = RewardModel::bernoulli(0.9).to_json();
  cfg.model2 = RewardModel::bernoulli(0.5).to_json();
  cfg.schedule = ThetaSchedule(11, 2.1).to_json();
  const auto result = run_batch(cfg, 2);
  CHECK(result.payload.at("equal_count").get<int64_t>() == 20);
  CHECK(result.payload.at("mismatch_count").get<int64_t>() == 0);
  const std::string csv = result_to_csv(result);
  CHECK(csv.rfind("rep,seed,equal,", 0) == 0);
}

TEST_CASE("mean regret growth is logarithmic, not linear") {
  // The m0=4000 preset keeps the survival constant near Delta, so the
  // retained heterogeneous pair dominates and growth is logarithmic.
  ExperimentConfig small;
  small.kind = ExperimentKind::AlgRegret;
  small.n = 10000;
  small.reps = 60;
  small.master_seed = 17;
  small.instance = CABInstance::bernoulli(0.9, 0.5, 0.5).to_json();
  small.policy = "ucb1";
  small.schedule = ThetaSchedule(4000, 2.1).to_json();
  auto large = small;
  large.n = 40000;
  const auto r_small = run_batch(small, 2);
  const auto r_large = run_batch(large, 2);
  const double ratio = r_large.mean_regret.back() / r_small.mean_regret.back();
  CHECK(ratio < 2.0);
}

TEST_CASE("worker exceptions reach the caller") {
  auto cfg = etc_config(1000, 16, 5);
  cfg.delta = 1.7;  // rejected inside each replication
  CHECK_THROWS_AS(run_batch(cfg, 4), std::invalid_argument);
}

TEST_CASE("custom checkpoints and bootstrap interval") {
  auto cfg = etc_config(1000, 40, 5);
  cfg.checkpoints = {10, 100, 1000};
  cfg.bootstrap = 400;
  const auto result = run_batch(cfg, 2);
  CHECK(result.checkpoints == std::vector<int64_t>{10, 100, 1000});
  CHECK(result.rows.front().regret_at_checkpoints.size() == 3);
  const auto& ci = result.payload.at("bootstrap");
  const double lo = ci.at("mean_regret_ci_lo").get<double>();
  const double hi = ci.at("mean_regret_ci_hi").get<double>();
  CHECK(lo <= result.mean_regret.back());
  CHECK(hi >= result.mean_regret.back());
  // determinism across worker counts holds with the bootstrap on
  CHECK(run_batch(cfg, 1).to_json().dump() == run_batch(cfg, 3).to_json().dump());

  auto bad = etc_config(1000, 5, 5);
  bad.checkpoints = {100, 50};
  CHECK_THROWS_AS(run_batch(bad, 1), std::invalid_argument);
}

TEST_CASE("overlays carry the reference curves") {
  auto cfg = etc_config(256, 5, 9);
  const auto result = run_batch(cfg, 1);
  REQUIRE(result.overlays.contains("lower_bound"));
  REQUIRE(result.overlays.contains("etc_bound"));
  const auto& t2 = result.overlays.at("etc_bound");
  CHECK(t2.size() == result.checkpoints.size());
  CHECK(t2.back().get<double>() ==
        doctest::Approx(etc_regret_bound(256, 0.3, 0.4, 0.5).value));
}

}  // TEST_SUITE
