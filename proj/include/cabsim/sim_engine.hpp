#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cabsim/cab_algorithms.hpp"
#include "json.hpp"

namespace cabsim {

enum class ExperimentKind { EtcRegret, AlgRegret, ZeroGap, Beta, Lemma1, EpochStats };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view s);

// One experiment description; serializes losslessly so a config file pins a
// run down completely.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::EtcRegret;
  int64_t n = 10000;
  int64_t reps = 100;
  uint64_t master_seed = 1;

  std::optional<nlohmann::json> instance;  // etc-regret / alg-regret
  std::optional<double> delta;             // etc-regret
  std::optional<std::string> policy;       // alg-regret / zerogap / epoch-stats
  std::optional<nlohmann::json> schedule;  // alg-regret / beta / lemma1 / epoch-stats
  std::optional<int64_t> truncation;       // beta
  std::optional<nlohmann::json> model1;    // beta / lemma1 / epoch-stats
  std::optional<nlohmann::json> model2;
  std::optional<nlohmann::json> reward1;   // zerogap
  std::optional<nlohmann::json> reward2;
  std::optional<int> bins;                 // zerogap
  std::vector<double> epsilons;            // zerogap tail table
  bool swap_arms = false;                  // zerogap diagnostic
  bool allow_zero_gap = false;             // beta diagnostic
  std::optional<double> bound_beta;        // alg-bound overlay
  std::optional<double> bound_c2;
  std::vector<int64_t> checkpoints;        // empty = powers of two plus n
  std::optional<int64_t> bootstrap;        // resample count for a mean-regret CI
  std::optional<std::string> out_path;     // default export destination
  std::optional<std::string> format;       // csv|json

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  uint64_t hash() const;
};

struct RegretRow {
  uint64_t seed = 0;
  std::vector<double> regret_at_checkpoints;
  int64_t epochs_count = 0;
  int64_t plays_on_type2 = 0;
};

struct AggregateResult {
  ExperimentKind kind = ExperimentKind::EtcRegret;
  nlohmann::json config;
  uint64_t config_hash = 0;

  // regret experiments
  std::vector<int64_t> checkpoints;
  std::vector<double> mean_regret;
  std::vector<double> stderr_regret;
  nlohmann::json overlays;  // reference curves aligned with checkpoints
  std::vector<RegretRow> rows;

  // zerogap
  std::vector<double> zerogap_samples;
  std::vector<uint64_t> row_seeds;

  // kind-specific summary (zerogap histogram/tails, beta estimate,
  // lemma1 tally, epoch stats)
  nlohmann::json payload;

  // not exported; exports must be byte-identical across worker counts
  double wall_seconds = 0.0;
  int workers_used = 1;

  nlohmann::json to_json() const;
};

AggregateResult run_batch(const ExperimentConfig& config, int workers);

std::string result_to_csv(const AggregateResult& result);
void export_result(const AggregateResult& result, std::string_view format,
                   const std::string& path);

// shortest round-trip decimal representation
std::string format_double(double value);

}  // namespace cabsim
