#include "cabsim/sim_engine.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cabsim/beta_estimator.hpp"
#include "cabsim/parallel.hpp"
#include "cabsim/zerogap.hpp"

namespace cabsim {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::EtcRegret:
      return "etc-regret";
    case ExperimentKind::AlgRegret:
      return "alg-regret";
    case ExperimentKind::ZeroGap:
      return "zerogap";
    case ExperimentKind::Beta:
      return "beta";
    case ExperimentKind::Lemma1:
      return "lemma1";
    case ExperimentKind::EpochStats:
      return "epoch-stats";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(std::string_view s) {
  if (s == "etc-regret") return ExperimentKind::EtcRegret;
  if (s == "alg-regret") return ExperimentKind::AlgRegret;
  if (s == "zerogap") return ExperimentKind::ZeroGap;
  if (s == "beta") return ExperimentKind::Beta;
  if (s == "lemma1") return ExperimentKind::Lemma1;
  if (s == "epoch-stats") return ExperimentKind::EpochStats;
  throw std::invalid_argument("unknown experiment kind: " + std::string(s));
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind)},
                      {"n", n},
                      {"reps", reps},
                      {"master_seed", master_seed}};
  if (instance) j["instance"] = *instance;
  if (delta) j["delta"] = *delta;
  if (policy) j["policy"] = *policy;
  if (schedule) j["schedule"] = *schedule;
  if (truncation) j["truncation"] = *truncation;
  if (model1) j["model1"] = *model1;
  if (model2) j["model2"] = *model2;
  if (reward1) j["reward1"] = *reward1;
  if (reward2) j["reward2"] = *reward2;
  if (bins) j["bins"] = *bins;
  if (!epsilons.empty()) j["epsilons"] = epsilons;
  if (swap_arms) j["swap_arms"] = true;
  if (allow_zero_gap) j["allow_zero_gap"] = true;
  if (bound_beta) j["bound_beta"] = *bound_beta;
  if (bound_c2) j["bound_c2"] = *bound_c2;
  if (!checkpoints.empty()) j["checkpoints"] = checkpoints;
  if (bootstrap) j["bootstrap"] = *bootstrap;
  if (out_path) j["out"] = *out_path;
  if (format) j["format"] = *format;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("n")) c.n = j.at("n").get<int64_t>();
  if (j.contains("reps")) c.reps = j.at("reps").get<int64_t>();
  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<uint64_t>();
  if (j.contains("instance")) c.instance = j.at("instance");
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("policy")) c.policy = j.at("policy").get<std::string>();
  if (j.contains("schedule")) c.schedule = j.at("schedule");
  if (j.contains("truncation")) c.truncation = j.at("truncation").get<int64_t>();
  if (j.contains("model1")) c.model1 = j.at("model1");
  if (j.contains("model2")) c.model2 = j.at("model2");
  if (j.contains("reward1")) c.reward1 = j.at("reward1");
  if (j.contains("reward2")) c.reward2 = j.at("reward2");
  if (j.contains("bins")) c.bins = j.at("bins").get<int>();
  if (j.contains("epsilons")) c.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (j.contains("swap_arms")) c.swap_arms = j.at("swap_arms").get<bool>();
  if (j.contains("allow_zero_gap")) {
    c.allow_zero_gap = j.at("allow_zero_gap").get<bool>();
  }
  if (j.contains("bound_beta")) c.bound_beta = j.at("bound_beta").get<double>();
  if (j.contains("bound_c2")) c.bound_c2 = j.at("bound_c2").get<double>();
  if (j.contains("checkpoints")) {
    c.checkpoints = j.at("checkpoints").get<std::vector<int64_t>>();
  }
  if (j.contains("bootstrap")) c.bootstrap = j.at("bootstrap").get<int64_t>();
  if (j.contains("out")) c.out_path = j.at("out").get<std::string>();
  if (j.contains("format")) c.format = j.at("format").get<std::string>();
  return c;
}

uint64_t ExperimentConfig::hash() const { return fnv1a64(to_json().dump()); }

namespace {

ThetaSchedule schedule_or_default(const ExperimentConfig& config,
                                  const ThetaSchedule& fallback) {
  if (config.schedule) return ThetaSchedule::from_json(*config.schedule);
  return fallback;
}

void aggregate_regret_rows(const ExperimentConfig& config,
                           AggregateResult& result) {
  const size_t ncp = result.checkpoints.size();
  result.mean_regret.assign(ncp, 0.0);
  result.stderr_regret.assign(ncp, 0.0);
  if (result.rows.empty()) return;
  for (const auto& row : result.rows) {
    for (size_t c = 0; c < ncp; ++c) {
      result.mean_regret[c] += row.regret_at_checkpoints[c];
    }
  }
  const auto reps = static_cast<double>(result.rows.size());
  for (auto& v : result.mean_regret) v /= reps;
  if (result.rows.size() > 1) {
    for (const auto& row : result.rows) {
      for (size_t c = 0; c < ncp; ++c) {
        const double d = row.regret_at_checkpoints[c] - result.mean_regret[c];
        result.stderr_regret[c] += d * d;
      }
    }
    for (auto& v : result.stderr_regret) {
      v = std::sqrt(v / (reps - 1.0) / reps);
    }
  }

  // reference curves
  const CABInstance inst = CABInstance::from_json(*config.instance);
  nlohmann::json overlays;
  if (inst.gap() > 0.0) {
    std::vector<double> t1;
    t1.reserve(ncp);
    for (const int64_t cp : result.checkpoints) {
      t1.push_back(lower_bound_curve(cp, inst.gap(), kLowerBoundAsymptoticC));
    }
    overlays["lower_bound"] = t1;
    if (config.kind == ExperimentKind::EtcRegret && config.delta &&
        inst.alpha() > 0.0) {
      std::vector<double> t2;
      t2.reserve(ncp);
      for (const int64_t cp : result.checkpoints) {
        t2.push_back(
            etc_regret_bound(cp, *config.delta, inst.gap(), inst.alpha()).value);
      }
      overlays["etc_bound"] = t2;
    }
    if (config.kind == ExperimentKind::AlgRegret && config.bound_beta &&
        config.bound_c2 && inst.alpha() > 0.0) {
      std::vector<double> t3;
      t3.reserve(ncp);
      for (const int64_t cp : result.checkpoints) {
        t3.push_back(alg_regret_bound(cp, inst.gap(), inst.alpha(),
                                      *config.bound_beta, *config.bound_c2));
      }
      overlays["alg_bound"] = t3;
    }
  }
  result.overlays = overlays;
}

void run_regret_batch(const ExperimentConfig& config, int workers,
                      AggregateResult& result) {
  if (!config.instance) {
    throw std::invalid_argument("regret experiments require an instance");
  }
  const CABInstance inst = CABInstance::from_json(*config.instance);
  result.checkpoints = config.checkpoints.empty()
                           ? default_checkpoints(config.n)
                           : config.checkpoints;
  result.rows.assign(static_cast<size_t>(config.reps), RegretRow{});

  const bool is_etc = config.kind == ExperimentKind::EtcRegret;
  const double delta = config.delta.value_or(0.0);
  if (is_etc && !config.delta) {
    throw std::invalid_argument("etc-regret requires delta");
  }
  const Policy policy =
      is_etc ? Policy::ucb1() : Policy::parse(config.policy.value_or("ucb1"));
  const ThetaSchedule schedule =
      schedule_or_default(config, ThetaSchedule::alg_default());

  parallel_for(config.reps, workers, [&](int64_t rep) {
    const uint64_t rep_seed = derive_rep_seed(config.master_seed,
                                              static_cast<uint64_t>(rep));
    RngStream rng =
        derive_stream(config.master_seed, static_cast<uint64_t>(rep), "run");

    RunRecord record =
        is_etc ? run_etc(inst, config.n, delta, rng, rep_seed,
                         config.checkpoints)
               : run_alg(inst, config.n, policy, schedule, rng, rep_seed,
                         config.checkpoints);
    RegretRow row;
    row.seed = rep_seed;
    row.regret_at_checkpoints = std::move(record.regret_at_checkpoints);
    row.epochs_count = static_cast<int64_t>(record.epochs.size());
    row.plays_on_type2 = record.plays_on_type2;
    result.rows[static_cast<size_t>(rep)] = std::move(row);
  });

  aggregate_regret_rows(config, result);

  if (config.bootstrap && *config.bootstrap > 0 && !result.rows.empty()) {
    // percentile CI for the final-checkpoint mean regret
    const int64_t resamples = *config.bootstrap;
    const auto reps = static_cast<uint64_t>(result.rows.size());
    std::vector<double> means(static_cast<size_t>(resamples));
    RngStream rng = derive_stream(config.master_seed, 0, "bootstrap");
    for (int64_t b = 0; b < resamples; ++b) {
      double sum = 0.0;
      for (uint64_t k = 0; k < reps; ++k) {
        const uint64_t idx = rng.uniform_index(reps);
        sum += result.rows[idx].regret_at_checkpoints.back();
      }
      means[static_cast<size_t>(b)] = sum / static_cast<double>(reps);
    }
    std::sort(means.begin(), means.end());
    auto pct = [&](double q) {
      const auto idx = static_cast<size_t>(
          std::min<double>(static_cast<double>(resamples - 1),
                           std::floor(q * static_cast<double>(resamples))));
      return means[idx];
    };
    result.payload = {{"bootstrap",
                       {{"resamples", resamples},
                        {"mean_regret_ci_lo", pct(0.025)},
                        {"mean_regret_ci_hi", pct(0.975)}}}};
  }
}

void run_zerogap_batch(const ExperimentConfig& config, int workers,
                       AggregateResult& result) {
  ZeroGapConfig zg;
  zg.policy = Policy::parse(config.policy.value_or("ucb1"));
  if (config.reward1) zg.reward1 = reward_from_json(*config.reward1);
  if (config.reward2) zg.reward2 = reward_from_json(*config.reward2);
  zg.n = config.n;
  zg.reps = config.reps;
  zg.bins = config.bins.value_or(100);
  zg.seed = config.master_seed;
  zg.epsilons = config.epsilons;
  zg.swap_arms = config.swap_arms;

  ZeroGapResult res = run_zerogap(zg, workers);
  result.payload = res.summary_json();
  // theoretical tail bounds alongside the empirical table
  if (zg.policy.kind == PolicyKind::Ucb1 || zg.policy.kind == PolicyKind::UcbRho) {
    auto& tail = result.payload.at("tail");
    for (auto& row : tail) {
      const TailBound bound = generic_ucb_tail_bound(
          config.n, row.at("epsilon").get<double>(), zg.policy.rho);
      row["theoretical_bound"] = bound.value;
      row["vacuous"] = bound.vacuous;
    }
  }
  result.zerogap_samples = std::move(res.samples);
  result.row_seeds.resize(static_cast<size_t>(config.reps));
  for (int64_t rep = 0; rep < config.reps; ++rep) {
    result.row_seeds[static_cast<size_t>(rep)] =
        derive_rep_seed(config.master_seed, static_cast<uint64_t>(rep));
  }
}

void run_beta_batch(const ExperimentConfig& config, int workers,
                    AggregateResult& result) {
  const ThetaSchedule schedule =
      schedule_or_default(config, ThetaSchedule::beta_default());
  const int64_t truncation = config.truncation.value_or(100000);
  if (config.instance) {
    const CABInstance inst = CABInstance::from_json(*config.instance);
    result.payload = estimate_beta_min(inst, schedule, truncation, config.reps,
                                       config.master_seed, workers)
                         .to_json();
    return;
  }
  if (!config.model1 || !config.model2) {
    throw std::invalid_argument("beta requires model1/model2 or an instance");
  }
  const RewardModel m1 = RewardModel::from_json(*config.model1);
  const RewardModel m2 = RewardModel::from_json(*config.model2);
  result.payload = estimate_beta(m1, m2, schedule, truncation, config.reps,
                                 config.master_seed, workers,
                                 config.allow_zero_gap)
                       .to_json();
}

void run_lemma1_batch(const ExperimentConfig& config, int workers,
                      AggregateResult& result) {
  if (!config.model1 || !config.model2) {
    throw std::invalid_argument("lemma1 requires model1 and model2");
  }
  const RewardModel m1 = RewardModel::from_json(*config.model1);
  const RewardModel m2 = RewardModel::from_json(*config.model2);
  const ThetaSchedule schedule =
      schedule_or_default(config, ThetaSchedule::alg_default());

  std::vector<Lemma1Result> checks(static_cast<size_t>(config.reps));
  parallel_for(config.reps, workers, [&](int64_t rep) {
    const uint64_t rep_seed =
        derive_rep_seed(config.master_seed, static_cast<uint64_t>(rep));
    checks[static_cast<size_t>(rep)] =
        check_lemma1_equality(m1, m2, config.n, schedule, rep_seed);
  });

  int64_t equal_count = 0;
  nlohmann::json mismatches = nlohmann::json::array();
  nlohmann::json per_rep = nlohmann::json::array();
  for (int64_t rep = 0; rep < config.reps; ++rep) {
    const auto& check = checks[static_cast<size_t>(rep)];
    if (check.equal) {
      ++equal_count;
    } else {
      nlohmann::json detail = check.to_json();
      detail["rep"] = rep;
      mismatches.push_back(detail);
    }
    nlohmann::json row = check.to_json();
    row["rep"] = rep;
    row["seed"] = derive_rep_seed(config.master_seed, static_cast<uint64_t>(rep));
    per_rep.push_back(std::move(row));
  }
  result.payload = {{"equal_count", equal_count},
                    {"mismatch_count", config.reps - equal_count},
                    {"mismatches", mismatches},
                    {"checks", per_rep}};
}

void run_epoch_stats_batch(const ExperimentConfig& config, int workers,
                           AggregateResult& result) {
  if (!config.model1 || !config.model2) {
    throw std::invalid_argument("epoch-stats requires model1 and model2");
  }
  const RewardModel m1 = RewardModel::from_json(*config.model1);
  const RewardModel m2 = RewardModel::from_json(*config.model2);
  const ThetaSchedule schedule =
      schedule_or_default(config, ThetaSchedule::alg_default());
  const Policy policy = Policy::parse(config.policy.value_or("ucb1"));
  result.payload = epoch_length_stats(m1, m2, schedule, policy, config.n,
                                      config.reps, config.master_seed, workers)
                       .to_json();
}

}  // namespace

AggregateResult run_batch(const ExperimentConfig& config, int workers) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  AggregateResult result;
  result.kind = config.kind;
  result.config = config.to_json();
  result.config_hash = config.hash();
  result.workers_used = workers;

  if (config.reps > 0) {
    switch (config.kind) {
      case ExperimentKind::EtcRegret:
      case ExperimentKind::AlgRegret:
        run_regret_batch(config, workers, result);
        break;
      case ExperimentKind::ZeroGap:
        run_zerogap_batch(config, workers, result);
        break;
      case ExperimentKind::Beta:
        run_beta_batch(config, workers, result);
        break;
      case ExperimentKind::Lemma1:
        run_lemma1_batch(config, workers, result);
        break;
      case ExperimentKind::EpochStats:
        run_epoch_stats_batch(config, workers, result);
        break;
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

nlohmann::json AggregateResult::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind)},
                      {"config", config},
                      {"config_hash", config_hash}};
  if (!checkpoints.empty()) {
    j["checkpoints"] = checkpoints;
    j["mean_regret"] = mean_regret;
    j["stderr_regret"] = stderr_regret;
    j["overlays"] = overlays;
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows) {
      rows_json.push_back({{"seed", row.seed},
                           {"regret_at_checkpoints", row.regret_at_checkpoints},
                           {"epochs_count", row.epochs_count},
                           {"plays_on_type2", row.plays_on_type2}});
    }
    j["rows"] = rows_json;
  }
  if (!zerogap_samples.empty()) j["samples"] = zerogap_samples;
  if (!payload.is_null()) j["payload"] = payload;
  return j;
}

namespace {

void append_regret_csv(const AggregateResult& result, std::string& out) {
  const auto& cfg = result.config;
  const CABInstance inst = CABInstance::from_json(cfg.at("instance"));
  const std::string algo = to_string(result.kind) == "etc-regret"
                               ? "etc"
                               : "alg:" + cfg.value("policy", std::string("ucb1"));
  std::string params;
  if (cfg.contains("delta")) {
    params = "delta=" + format_double(cfg.at("delta").get<double>());
  } else {
    nlohmann::json sched = cfg.contains("schedule")
                               ? cfg.at("schedule")
                               : ThetaSchedule::alg_default().to_json();
    params = "m0=" + std::to_string(sched.at("m0").get<int64_t>()) +
             ";gamma=" + format_double(sched.at("gamma").get<double>());
  }

  out += "algo,seed,n,alpha,mu1,mu2,delta_or_m0_gamma";
  for (const int64_t cp : result.checkpoints) {
    out += ",regret_at_" + std::to_string(cp);
  }
  out += ",epochs_count,plays_on_type2\n";

  const int64_t n = cfg.at("n").get<int64_t>();
  for (const auto& row : result.rows) {
    out += algo;
    out += ',' + std::to_string(row.seed);
    out += ',' + std::to_string(n);
    out += ',' + format_double(inst.alpha());
    out += ',' + format_double(inst.mu1());
    out += ',' + format_double(inst.mu2());
    out += ',' + params;
    for (const double r : row.regret_at_checkpoints) {
      out += ',' + format_double(r);
    }
    out += ',' + std::to_string(row.epochs_count);
    out += ',' + std::to_string(row.plays_on_type2);
    out += '\n';
  }
}

void append_zerogap_csv(const AggregateResult& result, std::string& out) {
  out += "policy,seed,n,N1_over_n\n";
  const std::string policy = result.payload.at("policy").get<std::string>();
  const int64_t n = result.payload.at("n").get<int64_t>();
  for (size_t i = 0; i < result.zerogap_samples.size(); ++i) {
    out += policy;
    out += ',' + std::to_string(result.row_seeds[i]);
    out += ',' + std::to_string(n);
    out += ',' + format_double(result.zerogap_samples[i]);
    out += '\n';
  }
}

void append_beta_csv(const AggregateResult& result, std::string& out) {
  out += "delta,m0,gamma,M,reps,beta_hat,std_error,checkpoint_m,survival_prob\n";
  const auto& p = result.payload;
  const std::string prefix =
      format_double(p.at("delta").get<double>()) + ',' +
      std::to_string(p.at("m0").get<int64_t>()) + ',' +
      format_double(p.at("gamma").get<double>()) + ',' +
      std::to_string(p.at("M").get<int64_t>()) + ',' +
      std::to_string(p.at("reps").get<int64_t>()) + ',' +
      format_double(p.at("beta_hat").get<double>()) + ',' +
      format_double(p.at("std_error").get<double>());
  const auto& ms = p.at("checkpoint_ms");
  const auto& survival = p.at("survival");
  for (size_t i = 0; i < ms.size(); ++i) {
    out += prefix;
    out += ',' + std::to_string(ms[i].get<int64_t>());
    out += ',' + format_double(survival[i].get<double>());
    out += '\n';
  }
}

void append_lemma1_csv(const AggregateResult& result, std::string& out) {
  out += "rep,seed,equal,adaptive_fired,tau,m_at_fire,pairs_observed,"
         "paired_fired,tau_prime\n";
  for (const auto& row : result.payload.at("checks")) {
    out += std::to_string(row.at("rep").get<int64_t>());
    out += ',' + std::to_string(row.at("seed").get<uint64_t>());
    out += ',' + std::to_string(row.at("equal").get<bool>() ? 1 : 0);
    out += ',' + std::to_string(row.at("adaptive_fired").get<bool>() ? 1 : 0);
    out += ',' + std::to_string(row.at("tau").get<int64_t>());
    out += ',' + std::to_string(row.at("m_at_fire").get<int64_t>());
    out += ',' + std::to_string(row.at("pairs_observed").get<int64_t>());
    out += ',' + std::to_string(row.at("paired_fired").get<bool>() ? 1 : 0);
    out += ',' + std::to_string(row.at("tau_prime").get<int64_t>());
    out += '\n';
  }
}

void append_epoch_stats_csv(const AggregateResult& result, std::string& out) {
  out += "reps,n,mean_tau,censored_fraction,q50,q90,q99\n";
  const auto& p = result.payload;
  out += std::to_string(p.at("reps").get<int64_t>());
  out += ',' + std::to_string(p.at("n").get<int64_t>());
  out += ',' + format_double(p.at("mean_tau").get<double>());
  out += ',' + format_double(p.at("censored_fraction").get<double>());
  out += ',' + format_double(p.at("q50").get<double>());
  out += ',' + format_double(p.at("q90").get<double>());
  out += ',' + format_double(p.at("q99").get<double>());
  out += '\n';
}

}  // namespace

std::string result_to_csv(const AggregateResult& result) {
  std::string out;
  if (result.payload.is_null() && result.rows.empty() &&
      result.zerogap_samples.empty()) {
    return out;  // empty aggregate
  }
  switch (result.kind) {
    case ExperimentKind::EtcRegret:
    case ExperimentKind::AlgRegret:
      append_regret_csv(result, out);
      break;
    case ExperimentKind::ZeroGap:
      append_zerogap_csv(result, out);
      break;
    case ExperimentKind::Beta:
      append_beta_csv(result, out);
      break;
    case ExperimentKind::Lemma1:
      append_lemma1_csv(result, out);
      break;
    case ExperimentKind::EpochStats:
      append_epoch_stats_csv(result, out);
      break;
  }
  return out;
}

void export_result(const AggregateResult& result, std::string_view format,
                   const std::string& path) {
  std::string body;
  if (format == "csv") {
    body = result_to_csv(result);
  } else if (format == "json") {
    body = result.to_json().dump(2);
    body += '\n';
  } else {
    throw std::invalid_argument("unknown export format: " + std::string(format));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output path: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace cabsim
