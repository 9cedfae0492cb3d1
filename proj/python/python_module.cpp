// pybind11 surface for the bandit laboratory: schedule/bound evaluation,
// single runs, Monte-Carlo estimators, and the batch engine. Structured
// values cross the boundary as plain dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cabsim/beta_estimator.hpp"
#include "cabsim/parallel.hpp"
#include "cabsim/sim_engine.hpp"
#include "cabsim/zerogap.hpp"

namespace py = pybind11;
using namespace cabsim;
using nlohmann::json;

namespace {

json to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    json out = json::object();
    for (const auto& item : obj.cast<py::dict>()) {
      out[item.first.cast<std::string>()] = to_json(item.second);
    }
    return out;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    json out = json::array();
    for (const auto& item : obj.cast<py::sequence>()) out.push_back(to_json(item));
    return out;
  }
  throw std::invalid_argument("unsupported python value in config");
}

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
      return py::int_(j.get<int64_t>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<uint64_t>());
    case json::value_t::number_float:
      return py::float_(j.get<double>());
    case json::value_t::string:
      return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) {
        out[py::str(key)] = to_py(value);
      }
      return out;
    }
    default:
      return py::none();
  }
}

RewardModel model_from(const py::dict& d) {
  return RewardModel::from_json(to_json(d));
}

}  // namespace

PYBIND11_MODULE(cabsim, m) {
  m.doc() = "countable-armed bandit simulation laboratory";

  // ---- theta schedule ----
  m.def(
      "theta",
      [](int64_t m0, double gamma, int64_t mm) {
        return ThetaSchedule(m0, gamma).theta(mm);
      },
      py::arg("m0"), py::arg("gamma"), py::arg("m"),
      "threshold value theta_m of the paired-difference test");

  m.def(
      "validate_schedule",
      [](int64_t m0, double gamma, int64_t horizon) {
        const auto report = validate_schedule(ThetaSchedule(m0, gamma), horizon);
        py::dict out;
        out["theta1_below_one"] = report.theta1_below_one;
        out["ratio_decreasing"] = report.ratio_decreasing;
        out["nonnegative"] = report.nonnegative;
        out["accepted"] = report.accepted();
        return out;
      },
      py::arg("m0"), py::arg("gamma"), py::arg("horizon") = 1000000);

  // ---- closed-form bounds ----
  m.def(
      "etc_regret_bound",
      [](int64_t n, double delta, double gap, double alpha) {
        const auto b = etc_regret_bound(n, delta, gap, alpha);
        py::dict out;
        out["value"] = b.value;
        out["linear_branch"] = b.linear_branch;
        return out;
      },
      py::arg("n"), py::arg("delta"), py::arg("gap"), py::arg("alpha"));

  m.def("alg_regret_bound", &alg_regret_bound, py::arg("n"), py::arg("gap"),
        py::arg("alpha"), py::arg("beta"), py::arg("c2"));
  m.def("lower_bound_curve", &lower_bound_curve, py::arg("n"), py::arg("gap"),
        py::arg("c") = kLowerBoundAsymptoticC);
  m.def("alg_bound_c1", &alg_bound_c1);

  auto tail_to_dict = [](const TailBound& b) {
    py::dict out;
    out["value"] = b.value;
    out["exponent"] = b.exponent;
    out["vacuous"] = b.vacuous;
    return out;
  };
  m.def(
      "ucb1_tail_bound",
      [tail_to_dict](int64_t n, double eps) {
        return tail_to_dict(ucb1_tail_bound(n, eps));
      },
      py::arg("n"), py::arg("epsilon"));
  m.def(
      "generic_ucb_tail_bound",
      [tail_to_dict](int64_t n, double eps, double rho) {
        return tail_to_dict(generic_ucb_tail_bound(n, eps, rho));
      },
      py::arg("n"), py::arg("epsilon"), py::arg("rho"));

  m.def(
      "ucb_index",
      [](double mean, int64_t plays, int64_t t, double rho) {
        TwoArmState state;
        state.plays = {plays, 1};
        state.reward_sum = {mean * static_cast<double>(plays), 0.0};
        return ucb_index(state, 0, t, rho);
      },
      py::arg("mean"), py::arg("plays"), py::arg("t"), py::arg("rho") = 2.0);

  // ---- single runs ----
  m.def(
      "run_etc",
      [](const py::dict& instance, int64_t n, double delta, uint64_t seed) {
        const auto inst = CABInstance::from_json(to_json(instance));
        RngStream rng = derive_stream(seed, 0, "run");
        return to_py(run_etc(inst, n, delta, rng, seed).to_json());
      },
      py::arg("instance"), py::arg("n"), py::arg("delta"), py::arg("seed") = 1);

  m.def(
      "run_alg",
      [](const py::dict& instance, int64_t n, const std::string& policy,
         int64_t m0, double gamma, uint64_t seed) {
        const auto inst = CABInstance::from_json(to_json(instance));
        RngStream rng = derive_stream(seed, 0, "run");
        return to_py(run_alg(inst, n, Policy::parse(policy),
                             ThetaSchedule(m0, gamma), rng, seed)
                         .to_json());
      },
      py::arg("instance"), py::arg("n"), py::arg("policy") = "ucb1",
      py::arg("m0") = 11, py::arg("gamma") = 2.1, py::arg("seed") = 1);

  m.def(
      "bernoulli_instance",
      [](double mu1, double mu2, double alpha) {
        return to_py(CABInstance::bernoulli(mu1, mu2, alpha).to_json());
      },
      py::arg("mu1"), py::arg("mu2"), py::arg("alpha"));

  // ---- estimators ----
  m.def(
      "estimate_beta",
      [](const py::dict& model1, const py::dict& model2, int64_t m0,
         double gamma, int64_t truncation, int64_t reps, uint64_t seed,
         int workers, bool allow_zero_gap) {
        const auto m1 = model_from(model1);
        const auto m2 = model_from(model2);
        const ThetaSchedule schedule(m0, gamma);
        json result;
        {
          py::gil_scoped_release release;
          result = estimate_beta(m1, m2, schedule, truncation, reps, seed,
                                 workers, allow_zero_gap)
                       .to_json();
        }
        return to_py(result);
      },
      py::arg("model1"), py::arg("model2"), py::arg("m0") = 4000,
      py::arg("gamma") = 2.1, py::arg("truncation") = 100000,
      py::arg("reps") = 10000, py::arg("seed") = 1, py::arg("workers") = 1,
      py::arg("allow_zero_gap") = false);

  m.def(
      "epoch_length_stats",
      [](const py::dict& model1, const py::dict& model2,
         const std::string& policy, int64_t n, int64_t reps, int64_t m0,
         double gamma, uint64_t seed, int workers) {
        const auto m1 = model_from(model1);
        const auto m2 = model_from(model2);
        const ThetaSchedule schedule(m0, gamma);
        const Policy p = Policy::parse(policy);
        json result;
        {
          py::gil_scoped_release release;
          result = epoch_length_stats(m1, m2, schedule, p, n, reps, seed,
                                      workers)
                       .to_json();
        }
        return to_py(result);
      },
      py::arg("model1"), py::arg("model2"), py::arg("policy") = "ucb1",
      py::arg("n") = 100000, py::arg("reps") = 1000, py::arg("m0") = 11,
      py::arg("gamma") = 2.1, py::arg("seed") = 1, py::arg("workers") = 1);

  m.def(
      "check_lemma1",
      [](const py::dict& model1, const py::dict& model2, int64_t n, int64_t m0,
         double gamma, uint64_t seed) {
        return to_py(check_lemma1_equality(model_from(model1),
                                           model_from(model2), n,
                                           ThetaSchedule(m0, gamma), seed)
                         .to_json());
      },
      py::arg("model1"), py::arg("model2"), py::arg("n") = 100000,
      py::arg("m0") = 11, py::arg("gamma") = 2.1, py::arg("seed") = 1);

  // ---- zero-gap lab ----
  m.def(
      "run_zerogap",
      [](const std::string& policy, const py::dict& reward1,
         const py::dict& reward2, int64_t n, int64_t reps, int bins,
         uint64_t seed, std::vector<double> epsilons, bool swap_arms,
         int workers) {
        ZeroGapConfig cfg;
        cfg.policy = Policy::parse(policy);
        cfg.reward1 = reward_from_json(to_json(reward1));
        cfg.reward2 = reward_from_json(to_json(reward2));
        cfg.n = n;
        cfg.reps = reps;
        cfg.bins = bins;
        cfg.seed = seed;
        cfg.epsilons = std::move(epsilons);
        cfg.swap_arms = swap_arms;
        json summary;
        std::vector<double> samples;
        {
          py::gil_scoped_release release;
          auto result = run_zerogap(cfg, workers);
          summary = result.summary_json();
          samples = std::move(result.samples);
        }
        py::dict out = to_py(summary).cast<py::dict>();
        out["samples"] = py::cast(samples);
        return out;
      },
      py::arg("policy"), py::arg("reward1"), py::arg("reward2"),
      py::arg("n") = 10000, py::arg("reps") = 2000, py::arg("bins") = 100,
      py::arg("seed") = 1, py::arg("epsilons") = std::vector<double>{},
      py::arg("swap_arms") = false, py::arg("workers") = 1);

  m.def(
      "tail_frequency",
      [](const std::vector<double>& samples, double eps) {
        return tail_frequency(samples, eps);
      },
      py::arg("samples"), py::arg("epsilon"));

  // ---- batch engine ----
  m.def(
      "run_batch",
      [](const py::dict& config, int workers) {
        const auto cfg = ExperimentConfig::from_json(to_json(config));
        json result;
        {
          py::gil_scoped_release release;
          result = run_batch(cfg, workers).to_json();
        }
        return to_py(result);
      },
      py::arg("config"), py::arg("workers") = 1);

  m.def(
      "export_batch",
      [](const py::dict& config, const std::string& format,
         const std::string& path, int workers) {
        const auto cfg = ExperimentConfig::from_json(to_json(config));
        py::gil_scoped_release release;
        export_result(run_batch(cfg, workers), format, path);
      },
      py::arg("config"), py::arg("format"), py::arg("path"),
      py::arg("workers") = 1);

  m.def("default_workers", &default_workers);
}
