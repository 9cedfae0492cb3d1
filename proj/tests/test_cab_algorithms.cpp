#include <cmath>
#include <vector>

#include "cabsim/cab_algorithms.hpp"
#include "doctest.h"

using namespace cabsim;

namespace {

void check_record_invariants(const RunRecord& record, const CABInstance& inst,
                             int64_t n) {
  int64_t total = 0;
  int committed = 0;
  for (const auto& epoch : record.epochs) {
    total += epoch.length;
    if (epoch.verdict == EpochVerdict::Committed) ++committed;
  }
  CHECK(total == n);
  CHECK(committed <= 1);
  if (committed == 1) {
    CHECK(record.epochs.back().verdict == EpochVerdict::Committed);
  }
  CHECK(std::abs(record.final_regret -
                 inst.gap() * static_cast<double>(record.plays_on_type2)) <
        1e-9);
  if (!record.full_trajectory.empty()) {
    CHECK(static_cast<int64_t>(record.full_trajectory.size()) == n);
    for (size_t i = 1; i < record.full_trajectory.size(); ++i) {
      CHECK(record.full_trajectory[i] >= record.full_trajectory[i - 1]);
    }
  }
  CHECK(record.regret_at_checkpoints.size() == record.checkpoints.size());
  CHECK(record.regret_at_checkpoints.back() ==
        doctest::Approx(record.final_regret).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("cab-algorithms") {

TEST_CASE("exploration length formula") {
  CHECK(etc_exploration_length(10000, 0.2) == 461);
  CHECK(etc_exploration_length(10000, 0.3) == 205);
}

TEST_CASE("paired test examples") {
  const ThetaSchedule s(11, 2.1);
  const std::vector<double> near_one = {0.9999};
  CHECK(paired_test(near_one, 1, s) == TestOutcome::Survive);

  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  CHECK(paired_test(zeros, 1, s) == TestOutcome::Fire);
  CHECK(paired_test(zeros, 3, s) == TestOutcome::Fire);

  // streams r1=1, r2=0: prefix sum m beats theta_m for every m
  std::vector<double> drift;
  for (int m = 1; m <= 1000; ++m) drift.push_back(static_cast<double>(m));
  for (int64_t m = 1; m <= 1000; m += 37) {
    CHECK(paired_test(drift, m, s) == TestOutcome::Survive);
  }

  // |sum| = 5 at m=10 sits below theta_10 ~ 8.314
  std::vector<double> fire10(10, 0.0);
  fire10[9] = 5.0;
  CHECK(paired_test(fire10, 10, s) == TestOutcome::Fire);

  CHECK_THROWS_AS(paired_test(zeros, 0, s), std::out_of_range);
  CHECK_THROWS_AS(paired_test(zeros, 4, s), std::out_of_range);
}

TEST_CASE("etc regret bound values") {
  // frozen from direct evaluation of the closed form
  CHECK(etc_regret_bound(10000, 0.2, 0.4, 1.0).value ==
        doctest::Approx(554.6389648535685).epsilon(1e-12));
  CHECK(etc_regret_bound(10000, 0.3, 0.4, 0.5).value ==
        doctest::Approx(423.88148852523216).epsilon(1e-12));

  const auto forced = etc_regret_bound(10000, 0.5, 0.4, 0.5);
  CHECK(forced.linear_branch);
  CHECK(forced.value == doctest::Approx(0.4 * 10000));

  // tiny gap: the linear branch wins inside the min
  const auto tiny = etc_regret_bound(10000, 1e-4, 2e-4, 0.5);
  CHECK(tiny.value == doctest::Approx(2e-4 * 10000));

  CHECK(etc_regret_bound(1, 0.2, 0.4, 0.5).linear_branch);
  CHECK_THROWS_AS(etc_regret_bound(10000, 0.0, 0.4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(etc_regret_bound(10000, 0.2, 0.4, 0.0), std::invalid_argument);
}

TEST_CASE("alg regret bound values") {
  CHECK(alg_bound_c1() == doctest::Approx(4.289868133696453).epsilon(1e-12));
  CHECK(alg_regret_bound(10000, 0.4, 0.5, 0.4, 10.0) ==
        doctest::Approx(484.8068867325056).epsilon(1e-12));
  // n = 1: ln 1 = 0 and the linear branch Delta*1 wins
  CHECK(alg_regret_bound(1, 0.4, 0.5, 0.4, 10.0) == doctest::Approx(0.4));
  CHECK_THROWS_AS(alg_regret_bound(10000, 0.4, 0.5, 0.0, 10.0),
                  std::invalid_argument);
}

TEST_CASE("lower-bound reference curve") {
  CHECK(lower_bound_curve(1, 0.4, 0.5) == doctest::Approx(0.0));
  CHECK(lower_bound_curve(10000, 0.4, kLowerBoundAsymptoticC) ==
        doctest::Approx(11.512925464970229).epsilon(1e-12));
  CHECK_THROWS_AS(lower_bound_curve(10, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("run_etc input validation") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 0.5);
  RngStream rng(1);
  CHECK_THROWS_AS(run_etc(inst, 1, 0.2, rng), std::invalid_argument);
  CHECK_THROWS_AS(run_etc(inst, 100, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(run_etc(inst, 100, 1.5, rng), std::invalid_argument);
}

TEST_CASE("run_etc conserves budget and the regret identity") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 0.3);
  for (const int64_t n : {2LL, 3LL, 7LL, 100LL, 101LL, 4097LL}) {
    for (const double delta : {0.1, 0.3, 1.0}) {
      RngStream rng = derive_stream(31, static_cast<uint64_t>(n), "etc");
      const auto record = run_etc(inst, n, delta, rng);
      check_record_invariants(record, inst, n);
    }
  }
}

TEST_CASE("run_etc with alpha = 1 incurs zero regret") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 1.0);
  RngStream rng(4);
  const auto record = run_etc(inst, 10000, 0.2, rng);
  CHECK(record.final_regret == 0.0);
  CHECK(record.plays_on_type2 == 0);
}

TEST_CASE("run_etc with alpha = 0 incurs linear regret") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 0.0);
  RngStream rng(4);
  const auto record = run_etc(inst, 5000, 0.2, rng);
  CHECK(record.plays_on_type2 == 5000);
  CHECK(record.final_regret == doctest::Approx(0.4 * 5000).epsilon(1e-12));
}

TEST_CASE("etc hypothesis-test error rates stay under the hoeffding bounds") {
  // delta = 0.2, Delta = 0.6: conditional verdict rates over full-length
  // exploration epochs
  const auto inst = CABInstance::bernoulli(0.9, 0.3, 0.5);
  const int64_t n = 10000;
  const double delta = 0.2;
  const int64_t L = etc_exploration_length(n, delta);
  int64_t hetero_epochs = 0;
  int64_t hetero_discards = 0;
  int64_t homo_epochs = 0;
  int64_t homo_keeps = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    RngStream rng = derive_stream(77, static_cast<uint64_t>(rep), "etc");
    const auto record = run_etc(inst, n, delta, rng);
    for (const auto& epoch : record.epochs) {
      if (epoch.verdict == EpochVerdict::HorizonReached) continue;
      // keep only epochs whose test ran at the full exploration length
      const bool tested_at_L =
          epoch.verdict == EpochVerdict::DiscardedHomogeneous
              ? epoch.test_fired_at_m.value_or(0) == L
              : epoch.length >= 2 * L;
      if (!tested_at_L) continue;
      const bool hetero = epoch.arm_types[0] != epoch.arm_types[1];
      if (hetero) {
        ++hetero_epochs;
        if (epoch.verdict == EpochVerdict::DiscardedHomogeneous) {
          ++hetero_discards;
        }
      } else {
        ++homo_epochs;
        if (epoch.verdict == EpochVerdict::Committed) ++homo_keeps;
      }
    }
  }
  REQUIRE(hetero_epochs > 500);
  REQUIRE(homo_epochs > 500);
  const double false_discard =
      static_cast<double>(hetero_discards) / static_cast<double>(hetero_epochs);
  const double false_keep =
      static_cast<double>(homo_keeps) / static_cast<double>(homo_epochs);
  const double se_fd = std::sqrt(false_discard * (1 - false_discard) /
                                 static_cast<double>(hetero_epochs));
  const double se_fk = std::sqrt(false_keep * (1 - false_keep) /
                                 static_cast<double>(homo_epochs));
  const double ld = static_cast<double>(L);
  CHECK(false_discard <= std::exp(-0.16 * ld / 2.0) + 2 * se_fd);
  CHECK(false_keep <= 2.0 * std::exp(-0.04 * ld / 2.0) + 2 * se_fk);
}

TEST_CASE("run_alg validates inputs") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 0.5);
  RngStream rng(1);
  CHECK_THROWS_AS(run_alg(inst, 1, Policy::ucb1(), ThetaSchedule(11, 2.1), rng),
                  std::invalid_argument);
  // theta1 > 1 for m0 = 2: rejected by validation
  CHECK_THROWS_AS(run_alg(inst, 100, Policy::ucb1(), ThetaSchedule(2, 2.1), rng),
                  std::invalid_argument);
}

TEST_CASE("run_alg conserves budget and the regret identity") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 0.4);
  const ThetaSchedule schedule(11, 2.1);
  for (const int64_t n : {2LL, 3LL, 5LL, 64LL, 1001LL, 20000LL}) {
    for (const char* policy : {"ucb1", "ts-beta", "ucb-rho:3"}) {
      RngStream rng = derive_stream(19, static_cast<uint64_t>(n),
                                    policy);
      const auto record =
          run_alg(inst, n, Policy::parse(policy), schedule, rng);
      check_record_invariants(record, inst, n);
      for (const auto& epoch : record.epochs) {
        if (epoch.verdict == EpochVerdict::DiscardedHomogeneous) {
          CHECK(epoch.length >= 2);
          CHECK(epoch.test_fired_at_m.has_value());
        }
      }
    }
  }
}

TEST_CASE("run_alg with alpha = 1 incurs zero regret") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 1.0);
  RngStream rng(4);
  for (const char* policy : {"ucb1", "ts-beta"}) {
    RngStream local = rng;
    const auto record =
        run_alg(inst, 5000, Policy::parse(policy), ThetaSchedule(11, 2.1), local);
    CHECK(record.final_regret == 0.0);
  }
}

TEST_CASE("lemma 1 on deterministic streams") {
  const ThetaSchedule schedule(11, 2.1);
  const int64_t n = 2000;
  std::vector<double> ones(static_cast<size_t>(n), 1.0);
  std::vector<double> zeros(static_cast<size_t>(n), 0.0);

  // drifting streams: neither side ever fires
  const auto drift = check_lemma1_on_streams(ones, zeros, n, schedule);
  CHECK(drift.equal);
  CHECK_FALSE(drift.adaptive_fired);
  CHECK_FALSE(drift.paired_fired);

  // identical streams: zero difference fires at m = 1
  const auto same = check_lemma1_on_streams(ones, ones, n, schedule);
  CHECK(same.equal);
  CHECK(same.adaptive_fired);
  CHECK(same.m_at_fire == 1);
  CHECK(same.tau_prime == 1);
  CHECK(same.tau == 2);
}

TEST_CASE("lemma 1 equality over random seeds") {
  const ThetaSchedule schedule(11, 2.1);
  const auto b90 = RewardModel::bernoulli(0.9);
  const auto b50 = RewardModel::bernoulli(0.5);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const auto res = check_lemma1_equality(b90, b50, 20000, schedule, seed);
    CHECK(res.equal);
  }
}

TEST_CASE("default checkpoints are powers of two plus the horizon") {
  CHECK(default_checkpoints(10) ==
        std::vector<int64_t>{1, 2, 4, 8, 10});
  CHECK(default_checkpoints(8) == std::vector<int64_t>{1, 2, 4, 8});
  CHECK(default_checkpoints(1) == std::vector<int64_t>{1});
}

TEST_CASE("run records serialize") {
  const auto inst = CABInstance::bernoulli(0.9, 0.5, 0.5);
  RngStream rng(9);
  const auto record = run_etc(inst, 500, 0.3, rng, 1234);
  const auto j = record.to_json();
  CHECK(j.at("algo") == "etc");
  CHECK(j.at("n") == 500);
  CHECK(j.at("seed") == 1234);
  CHECK(j.at("epochs_count").get<int64_t>() ==
        static_cast<int64_t>(record.epochs.size()));
  CHECK(j.at("pseudo_regret_trajectory").size() == 500);
}

}  // TEST_SUITE
