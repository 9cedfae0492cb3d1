// cabsim: experiment runner for the countable-armed bandit laboratory.
//
// Exit codes: 0 success, 2 configuration error, 3 assertion failure
// (--assert mode).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cabsim/beta_estimator.hpp"
#include "cabsim/parallel.hpp"
#include "cabsim/sim_engine.hpp"
#include "cabsim/zerogap.hpp"

namespace {

using nlohmann::json;
using namespace cabsim;

bool given(const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; }

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  uint64_t seed = 1;
  int64_t reps = 0;  // 0 = keep subcommand default
  int64_t n = 0;
  int workers = default_workers();
  bool assert_mode = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* format_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--out", opts.out_path, "output path (stdout when absent)");
  opts.format_opt = cmd->add_option("--format", opts.format, "csv|json")
                        ->check(CLI::IsMember({"csv", "json"}));
  opts.seed_opt = cmd->add_option("--seed", opts.seed, "master seed");
  cmd->add_option("--reps", opts.reps, "replications");
  cmd->add_option("--n", opts.n, "horizon (plays)");
  cmd->add_option("--workers", opts.workers, "worker threads");
  cmd->add_flag("--assert", opts.assert_mode,
                "exit 3 when the built-in acceptance check fails");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  json j;
  in >> j;
  return j;
}

// precedence: explicit flags > config file > subcommand defaults
ExperimentConfig build_config(ExperimentKind kind, const CommonOpts& opts,
                              int64_t default_reps, int64_t default_n) {
  ExperimentConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = ExperimentConfig::from_json(load_config_file(opts.config_path));
    if (cfg.kind != kind) {
      throw std::invalid_argument("config kind does not match the subcommand");
    }
  } else {
    cfg.kind = kind;
    cfg.reps = default_reps;
    cfg.n = default_n;
  }
  if (given(opts.seed_opt)) cfg.master_seed = opts.seed;
  if (opts.reps > 0) cfg.reps = opts.reps;
  if (opts.n > 0) cfg.n = opts.n;
  return cfg;
}

void emit(const AggregateResult& result, const CommonOpts& opts,
          const ExperimentConfig& cfg) {
  const std::string out_path =
      !opts.out_path.empty() ? opts.out_path : cfg.out_path.value_or("");
  const std::string format =
      given(opts.format_opt) ? opts.format : cfg.format.value_or(opts.format);
  if (!out_path.empty()) {
    try {
      export_result(result, format, out_path);
    } catch (const std::exception&) {
      // salvage completed replications before surfacing the failure
      std::cerr << "export to " << out_path
                << " failed; dumping the result to stdout\n";
      if (format == "csv") {
        std::cout << result_to_csv(result);
      } else {
        std::cout << result.to_json().dump(2) << "\n";
      }
      throw;
    }
    std::cerr << "wrote " << out_path << " ("
              << format_double(result.wall_seconds) << "s, "
              << result.workers_used << " workers)\n";
    return;
  }
  if (format == "csv") {
    std::cout << result_to_csv(result);
  } else {
    std::cout << result.to_json().dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"countable-armed bandit simulation laboratory"};
  app.require_subcommand(1);

  // ---- run-etc ----
  CommonOpts etc_opts;
  double etc_mu1 = 0.9, etc_mu2 = 0.5, etc_alpha = 0.5, etc_delta = 0.3;
  auto* etc_cmd = app.add_subcommand("run-etc", "ETC regret batches");
  add_common(etc_cmd, etc_opts);
  auto* etc_mu1_opt = etc_cmd->add_option("--mu1", etc_mu1, "optimal type mean");
  auto* etc_mu2_opt = etc_cmd->add_option("--mu2", etc_mu2, "inferior type mean");
  auto* etc_alpha_opt =
      etc_cmd->add_option("--alpha", etc_alpha, "optimal-type proportion");
  auto* etc_delta_opt =
      etc_cmd->add_option("--delta", etc_delta, "separability parameter");
  int64_t etc_bootstrap = 0;
  etc_cmd->add_option("--bootstrap", etc_bootstrap,
                      "resamples for a mean-regret CI (0 = off)");

  // ---- run-alg ----
  CommonOpts alg_opts;
  double alg_mu1 = 0.9, alg_mu2 = 0.5, alg_alpha = 0.5;
  std::string alg_policy = "ucb1";
  int64_t alg_m0 = 11;
  double alg_gamma = 2.1;
  double alg_bound_beta = -1.0, alg_bound_c2 = -1.0;
  auto* alg_cmd =
      app.add_subcommand("run-alg", "adaptive-epoch regret batches");
  add_common(alg_cmd, alg_opts);
  auto* alg_mu1_opt = alg_cmd->add_option("--mu1", alg_mu1, "optimal type mean");
  auto* alg_mu2_opt = alg_cmd->add_option("--mu2", alg_mu2, "inferior type mean");
  auto* alg_alpha_opt =
      alg_cmd->add_option("--alpha", alg_alpha, "optimal-type proportion");
  auto* alg_policy_opt = alg_cmd->add_option(
      "--policy", alg_policy, "ucb1|ucb-rho:<r>|ts-beta|ts-gauss:<s>|greedy-commit");
  auto* alg_m0_opt = alg_cmd->add_option("--m0", alg_m0, "theta schedule m0");
  auto* alg_gamma_opt =
      alg_cmd->add_option("--gamma", alg_gamma, "theta schedule gamma");
  alg_cmd->add_option("--bound-beta", alg_bound_beta,
                      "survival constant for the alg-bound overlay");
  alg_cmd->add_option("--bound-c2", alg_bound_c2, "C2 for the alg-bound overlay");
  int64_t alg_bootstrap = 0;
  alg_cmd->add_option("--bootstrap", alg_bootstrap,
                      "resamples for a mean-regret CI (0 = off)");

  // ---- zerogap ----
  CommonOpts zg_opts;
  std::string zg_policy = "ucb1";
  std::string zg_reward1 = R"({"kind":"bernoulli","p":0.5})";
  std::string zg_reward2 = R"({"kind":"bernoulli","p":0.5})";
  int zg_bins = 100;
  std::vector<double> zg_eps;
  bool zg_swap = false;
  auto* zg_cmd =
      app.add_subcommand("zerogap", "two-armed equal-means N1/n experiments");
  add_common(zg_cmd, zg_opts);
  auto* zg_policy_opt = zg_cmd->add_option("--policy", zg_policy, "playing rule id");
  auto* zg_r1_opt = zg_cmd->add_option("--reward1", zg_reward1, "reward spec JSON");
  auto* zg_r2_opt = zg_cmd->add_option("--reward2", zg_reward2, "reward spec JSON");
  auto* zg_bins_opt = zg_cmd->add_option("--bins", zg_bins, "histogram bins");
  auto* zg_eps_opt = zg_cmd->add_option("--eps", zg_eps, "tail epsilons");
  zg_cmd->add_flag("--swap-arms", zg_swap, "swap per-arm substreams");

  // ---- estimate-beta ----
  CommonOpts beta_opts;
  double beta_mu1 = 0.9;
  double beta_delta = 0.4;
  std::string beta_grid;
  std::string beta_model1, beta_model2;
  int64_t beta_m0 = 4000;
  double beta_gamma = 2.1;
  int64_t beta_M = 100000;
  bool beta_zero_ok = false;
  auto* beta_cmd =
      app.add_subcommand("estimate-beta", "Monte-Carlo survival constant");
  add_common(beta_cmd, beta_opts);
  beta_cmd->add_option("--mu1", beta_mu1, "Bernoulli mean of the optimal type");
  beta_cmd->add_option("--delta", beta_delta, "gap (mu2 = mu1 - delta)");
  beta_cmd->add_option("--delta-grid", beta_grid,
                       "start:stop:step grid for the (delta, beta) table");
  auto* beta_m1_opt = beta_cmd->add_option(
      "--model1", beta_model1, "reward model JSON (overrides --mu1)");
  auto* beta_m2_opt =
      beta_cmd->add_option("--model2", beta_model2, "reward model JSON");
  auto* beta_m0_opt = beta_cmd->add_option("--m0", beta_m0, "theta schedule m0");
  auto* beta_gamma_opt =
      beta_cmd->add_option("--gamma", beta_gamma, "theta schedule gamma");
  auto* beta_M_opt = beta_cmd->add_option("--M", beta_M, "truncation horizon");
  beta_cmd->add_flag("--allow-zero-gap", beta_zero_ok, "diagnostic zero-gap mode");

  // ---- check-lemma1 ----
  CommonOpts l1_opts;
  std::string l1_model1 = R"({"kind":"bernoulli","p":0.9})";
  std::string l1_model2 = R"({"kind":"bernoulli","p":0.5})";
  int64_t l1_m0 = 11;
  double l1_gamma = 2.1;
  auto* l1_cmd = app.add_subcommand(
      "check-lemma1", "pathwise equality of the epoch stopping times");
  add_common(l1_cmd, l1_opts);
  auto* l1_m1_opt = l1_cmd->add_option("--model1", l1_model1, "reward model JSON");
  auto* l1_m2_opt = l1_cmd->add_option("--model2", l1_model2, "reward model JSON");
  auto* l1_m0_opt = l1_cmd->add_option("--m0", l1_m0, "theta schedule m0");
  auto* l1_gamma_opt =
      l1_cmd->add_option("--gamma", l1_gamma, "theta schedule gamma");

  // ---- epoch-stats ----
  CommonOpts ep_opts;
  std::string ep_model1 = R"({"kind":"bernoulli","p":0.5})";
  std::string ep_model2 = R"({"kind":"bernoulli","p":0.5})";
  std::string ep_policy = "ucb1";
  int64_t ep_m0 = 11;
  double ep_gamma = 2.1;
  auto* ep_cmd =
      app.add_subcommand("epoch-stats", "single-epoch termination times");
  add_common(ep_cmd, ep_opts);
  auto* ep_m1_opt = ep_cmd->add_option("--model1", ep_model1, "reward model JSON");
  auto* ep_m2_opt = ep_cmd->add_option("--model2", ep_model2, "reward model JSON");
  auto* ep_policy_opt = ep_cmd->add_option("--policy", ep_policy, "playing rule id");
  auto* ep_m0_opt = ep_cmd->add_option("--m0", ep_m0, "theta schedule m0");
  auto* ep_gamma_opt =
      ep_cmd->add_option("--gamma", ep_gamma, "theta schedule gamma");

  // ---- bounds ----
  std::vector<int64_t> bd_n{10000};
  double bd_gap = 0.4, bd_alpha = 0.5, bd_delta = -1.0, bd_beta = -1.0,
         bd_c2 = -1.0, bd_C = kLowerBoundAsymptoticC, bd_rho = 2.0;
  std::vector<double> bd_eps;
  std::string bd_format = "json";
  auto* bd_cmd =
      app.add_subcommand("bounds", "closed-form reference curves and tails");
  bd_cmd->add_option("--n", bd_n, "horizons");
  bd_cmd->add_option("--gap", bd_gap, "type gap Delta");
  bd_cmd->add_option("--alpha", bd_alpha, "optimal-type proportion");
  bd_cmd->add_option("--delta", bd_delta, "ETC delta (enables the etc_bound column)");
  bd_cmd->add_option("--beta", bd_beta,
                     "survival constant (enables the alg_bound column)");
  bd_cmd->add_option("--c2", bd_c2, "alg-bound C2");
  bd_cmd->add_option("--C", bd_C, "lower-bound constant");
  bd_cmd->add_option("--rho", bd_rho, "UCB exploration coefficient");
  bd_cmd->add_option("--eps", bd_eps, "zero-gap tail epsilons");
  bd_cmd->add_option("--format", bd_format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (etc_cmd->parsed()) {
      ExperimentConfig cfg =
          build_config(ExperimentKind::EtcRegret, etc_opts, 100, 10000);
      const bool inst_flags = given(etc_mu1_opt) || given(etc_mu2_opt) ||
                              given(etc_alpha_opt);
      if (inst_flags || !cfg.instance) {
        cfg.instance =
            CABInstance::bernoulli(etc_mu1, etc_mu2, etc_alpha).to_json();
      }
      if (given(etc_delta_opt) || !cfg.delta) cfg.delta = etc_delta;
      if (etc_bootstrap > 0) cfg.bootstrap = etc_bootstrap;
      emit(run_batch(cfg, etc_opts.workers), etc_opts, cfg);
      return 0;
    }

    if (alg_cmd->parsed()) {
      ExperimentConfig cfg =
          build_config(ExperimentKind::AlgRegret, alg_opts, 100, 10000);
      const bool inst_flags = given(alg_mu1_opt) || given(alg_mu2_opt) ||
                              given(alg_alpha_opt);
      if (inst_flags || !cfg.instance) {
        cfg.instance =
            CABInstance::bernoulli(alg_mu1, alg_mu2, alg_alpha).to_json();
      }
      if (given(alg_policy_opt) || !cfg.policy) cfg.policy = alg_policy;
      if (given(alg_m0_opt) || given(alg_gamma_opt) || !cfg.schedule) {
        cfg.schedule = ThetaSchedule(alg_m0, alg_gamma).to_json();
      }
      if (alg_bound_beta > 0.0) cfg.bound_beta = alg_bound_beta;
      if (alg_bound_c2 >= 0.0) cfg.bound_c2 = alg_bound_c2;
      if (alg_bootstrap > 0) cfg.bootstrap = alg_bootstrap;
      emit(run_batch(cfg, alg_opts.workers), alg_opts, cfg);
      return 0;
    }

    if (zg_cmd->parsed()) {
      ExperimentConfig cfg =
          build_config(ExperimentKind::ZeroGap, zg_opts, 2000, 10000);
      if (given(zg_policy_opt) || !cfg.policy) cfg.policy = zg_policy;
      if (given(zg_r1_opt) || !cfg.reward1) cfg.reward1 = json::parse(zg_reward1);
      if (given(zg_r2_opt) || !cfg.reward2) cfg.reward2 = json::parse(zg_reward2);
      if (given(zg_bins_opt) || !cfg.bins) cfg.bins = zg_bins;
      if (given(zg_eps_opt) || cfg.epsilons.empty()) cfg.epsilons = zg_eps;
      if (zg_swap) cfg.swap_arms = true;
      const auto result = run_batch(cfg, zg_opts.workers);
      emit(result, zg_opts, cfg);
      if (zg_opts.assert_mode) {
        for (const auto& row : result.payload.at("tail")) {
          if (!row.contains("theoretical_bound")) continue;
          if (row.at("vacuous").get<bool>()) continue;
          const double emp = row.at("empirical").get<double>();
          const double se =
              std::sqrt(emp * (1.0 - emp) / static_cast<double>(cfg.reps));
          if (emp > row.at("theoretical_bound").get<double>() + 2.0 * se) {
            std::cerr << "tail bound violated at epsilon="
                      << row.at("epsilon").get<double>() << "\n";
            return 3;
          }
        }
      }
      return 0;
    }

    if (beta_cmd->parsed()) {
      const ThetaSchedule grid_schedule(beta_m0, beta_gamma);
      const int64_t grid_reps = beta_opts.reps > 0 ? beta_opts.reps : 10000;
      if (!beta_grid.empty()) {
        // (delta, beta_hat) table over the grid
        double start = 0, stop = 0, step = 0;
        if (std::sscanf(beta_grid.c_str(), "%lf:%lf:%lf", &start, &stop,
                        &step) != 3 ||
            step <= 0) {
          throw std::invalid_argument("--delta-grid expects start:stop:step");
        }
        std::string csv = "delta,m0,gamma,M,reps,beta_hat,std_error\n";
        json rows = json::array();
        for (double d = start; d <= stop + 1e-12; d += step) {
          const auto est = estimate_beta(
              RewardModel::bernoulli(beta_mu1),
              RewardModel::bernoulli(beta_mu1 - d), grid_schedule, beta_M,
              grid_reps, beta_opts.seed, beta_opts.workers);
          csv += format_double(d) + ',' + std::to_string(beta_m0) + ',' +
                 format_double(beta_gamma) + ',' + std::to_string(beta_M) +
                 ',' + std::to_string(grid_reps) + ',' +
                 format_double(est.estimate) + ',' +
                 format_double(est.std_error) + '\n';
          rows.push_back(est.to_json());
        }
        if (!beta_opts.out_path.empty()) {
          std::ofstream out(beta_opts.out_path, std::ios::binary);
          if (!out) throw std::runtime_error("cannot open output path");
          out << (beta_opts.format == "csv" ? csv : rows.dump(2) + "\n");
        } else {
          std::cout << (beta_opts.format == "csv" ? csv : rows.dump(2) + "\n");
        }
        return 0;
      }
      ExperimentConfig cfg =
          build_config(ExperimentKind::Beta, beta_opts, 10000, 10000);
      if (given(beta_m0_opt) || given(beta_gamma_opt) || !cfg.schedule) {
        cfg.schedule = grid_schedule.to_json();
      }
      if (given(beta_M_opt) || !cfg.truncation) cfg.truncation = beta_M;
      if (beta_zero_ok) cfg.allow_zero_gap = true;
      const bool model_flags = given(beta_m1_opt) || given(beta_m2_opt);
      if (model_flags || (!cfg.model1 && !cfg.instance)) {
        cfg.model1 = !beta_model1.empty()
                         ? json::parse(beta_model1)
                         : RewardModel::bernoulli(beta_mu1).to_json();
        cfg.model2 =
            !beta_model2.empty()
                ? json::parse(beta_model2)
                : RewardModel::bernoulli(beta_mu1 - beta_delta).to_json();
      }
      emit(run_batch(cfg, beta_opts.workers), beta_opts, cfg);
      return 0;
    }

    if (l1_cmd->parsed()) {
      ExperimentConfig cfg =
          build_config(ExperimentKind::Lemma1, l1_opts, 500, 100000);
      if (given(l1_m1_opt) || !cfg.model1) cfg.model1 = json::parse(l1_model1);
      if (given(l1_m2_opt) || !cfg.model2) cfg.model2 = json::parse(l1_model2);
      if (given(l1_m0_opt) || given(l1_gamma_opt) || !cfg.schedule) {
        cfg.schedule = ThetaSchedule(l1_m0, l1_gamma).to_json();
      }
      const auto result = run_batch(cfg, l1_opts.workers);
      emit(result, l1_opts, cfg);
      if (l1_opts.assert_mode &&
          result.payload.at("mismatch_count").get<int64_t>() != 0) {
        std::cerr << "stopping-time equality failed on "
                  << result.payload.at("mismatch_count").get<int64_t>()
                  << " replications\n";
        return 3;
      }
      return 0;
    }

    if (ep_cmd->parsed()) {
      ExperimentConfig cfg =
          build_config(ExperimentKind::EpochStats, ep_opts, 1000, 100000);
      if (given(ep_m1_opt) || !cfg.model1) cfg.model1 = json::parse(ep_model1);
      if (given(ep_m2_opt) || !cfg.model2) cfg.model2 = json::parse(ep_model2);
      if (given(ep_policy_opt) || !cfg.policy) cfg.policy = ep_policy;
      if (given(ep_m0_opt) || given(ep_gamma_opt) || !cfg.schedule) {
        cfg.schedule = ThetaSchedule(ep_m0, ep_gamma).to_json();
      }
      emit(run_batch(cfg, ep_opts.workers), ep_opts, cfg);
      return 0;
    }

    if (bd_cmd->parsed()) {
      json rows = json::array();
      std::string csv = "n,lower_bound";
      if (bd_delta > 0) csv += ",etc_bound";
      if (bd_beta > 0) csv += ",alg_bound";
      for (const double e : bd_eps) {
        csv += ",tail_eps_" + format_double(e) + ",vacuous_eps_" +
               format_double(e);
      }
      csv += "\n";
      for (const int64_t n : bd_n) {
        json row = {{"n", n}, {"lower_bound", lower_bound_curve(n, bd_gap, bd_C)}};
        csv += std::to_string(n) + ',' +
               format_double(row["lower_bound"].get<double>());
        if (bd_delta > 0) {
          const auto b = etc_regret_bound(n, bd_delta, bd_gap, bd_alpha);
          row["etc_bound"] = b.value;
          row["etc_bound_linear_branch"] = b.linear_branch;
          csv += ',' + format_double(b.value);
        }
        if (bd_beta > 0) {
          const double b = alg_regret_bound(n, bd_gap, bd_alpha, bd_beta,
                                            std::max(bd_c2, 0.0));
          row["alg_bound"] = b;
          csv += ',' + format_double(b);
        }
        json tails = json::array();
        for (const double e : bd_eps) {
          const auto t = generic_ucb_tail_bound(n, e, bd_rho);
          tails.push_back({{"epsilon", e},
                           {"rho", bd_rho},
                           {"bound", t.value},
                           {"exponent", t.exponent},
                           {"vacuous", t.vacuous}});
          csv += ',' + format_double(t.value) + ',' + (t.vacuous ? "1" : "0");
        }
        if (!bd_eps.empty()) row["tails"] = tails;
        rows.push_back(row);
        csv += '\n';
      }
      std::cout << (bd_format == "csv" ? csv : rows.dump(2) + "\n");
      return 0;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
