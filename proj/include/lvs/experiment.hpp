#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvs/channel.hpp"
#include "lvs/lrt.hpp"
#include "lvs/metrics.hpp"
#include "lvs/nn.hpp"
#include "lvs/scenario.hpp"

namespace lvs {

/// Settings for the figure-reproduction runs. Figure runners override the
/// per-figure variant parameters (NLoS list, BS count) themselves; everything
/// else comes from here.
struct ExperimentConfig {
  std::string scenario_preset = "bs4";  // "bs4", "bs6", or a scenario JSON path
  double thermal_noise_std_ns = 300.0;
  std::vector<double> nlos_std_ns = {300.0, 500.0, 700.0};
  double po_train = 0.5;
  std::vector<double> po_test = {0.5, 0.1, 0.01, 0.0005};
  int n_test = 10000;
  int max_seconds = 400;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  TrainConfig train;

  void validate() const {
    if (!(thermal_noise_std_ns > 0.0)) {
      throw std::invalid_argument("thermal_noise_std_ns must be > 0");
    }
    if (nlos_std_ns.empty()) {
      throw std::invalid_argument("nlos_std_ns list must be nonempty");
    }
    for (double v : nlos_std_ns) {
      if (!(v >= 0.0)) throw std::invalid_argument("nlos_std_ns must be >= 0");
    }
    if (!(po_train >= 0.0 && po_train <= 1.0)) {
      throw std::invalid_argument("po_train must lie in [0,1]");
    }
    if (po_test.empty()) {
      throw std::invalid_argument("po_test list must be nonempty");
    }
    for (double v : po_test) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("po_test values must lie in [0,1]");
      }
    }
    if (n_test < 1) throw std::invalid_argument("n_test must be >= 1");
    if (max_seconds < 1) throw std::invalid_argument("max_seconds must be >= 1");
    train.validate();
  }
};

inline Scenario resolve_scenario(const std::string& preset) {
  if (preset == "bs4") return Scenario::corners4();
  if (preset == "bs6") return Scenario::corners6();
  std::ifstream in(preset);
  if (!in) {
    throw std::runtime_error("scenario preset is neither bs4/bs6 nor a readable file: " +
                             preset);
  }
  return scenario_from_json(nlohmann::json::parse(in));
}

// Config JSON mirrors the field names; CLI flags override file values.

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.scenario_preset = j.value("scenario_preset", cfg.scenario_preset);
  cfg.thermal_noise_std_ns =
      j.value("thermal_noise_std_ns", cfg.thermal_noise_std_ns);
  if (j.contains("nlos_std_ns")) {
    cfg.nlos_std_ns = j.at("nlos_std_ns").get<std::vector<double>>();
  }
  cfg.po_train = j.value("po_train", cfg.po_train);
  if (j.contains("po_test")) {
    cfg.po_test = j.at("po_test").get<std::vector<double>>();
  }
  cfg.n_test = j.value("n_test", cfg.n_test);
  cfg.max_seconds = j.value("max_seconds", cfg.max_seconds);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
    cfg.train.max_validation_failures =
        t.value("max_validation_failures", cfg.train.max_validation_failures);
    cfg.train.validation_fraction =
        t.value("validation_fraction", cfg.train.validation_fraction);
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.init_scale = t.value("init_scale", cfg.train.init_scale);
    cfg.train.residual_features =
        t.value("residual_features", cfg.train.residual_features);
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["scenario_preset"] = cfg.scenario_preset;
  j["thermal_noise_std_ns"] = cfg.thermal_noise_std_ns;
  j["nlos_std_ns"] = cfg.nlos_std_ns;
  j["po_train"] = cfg.po_train;
  j["po_test"] = cfg.po_test;
  j["n_test"] = cfg.n_test;
  j["max_seconds"] = cfg.max_seconds;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["train"] = {{"max_epochs", cfg.train.max_epochs},
                {"max_validation_failures", cfg.train.max_validation_failures},
                {"validation_fraction", cfg.train.validation_fraction},
                {"learning_rate", cfg.train.learning_rate},
                {"init_scale", cfg.train.init_scale},
                {"residual_features", cfg.train.residual_features}};
  return j;
}

namespace detail {

inline std::string format_compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

/// `#` comment lines embedded at the top of every emitted CSV: the resolved
/// configuration of the cell plus every derived seed, enough to re-run the
/// file bit-identically.
inline std::vector<std::string> cell_comment_lines(
    const ExperimentConfig& cfg, const std::string& cell,
    const Scenario& sc, double nlos, double po_test_value,
    std::uint64_t train_seed, std::uint64_t test_seed,
    std::uint64_t nn_seed) {
  std::vector<std::string> lines;
  lines.push_back("cell=" + cell);
  lines.push_back("scenario=" + cfg.scenario_preset +
                  " n_bs=" + std::to_string(sc.n_bs()));
  lines.push_back("sigma_ns=" + format_compact(cfg.thermal_noise_std_ns) +
                  " nlos_ns=" + format_compact(nlos));
  lines.push_back("po_train=" + format_compact(cfg.po_train) +
                  " po_test=" + format_compact(po_test_value));
  lines.push_back("n_test=" + std::to_string(cfg.n_test) +
                  " max_seconds=" + std::to_string(cfg.max_seconds));
  lines.push_back(
      "train: max_epochs=" + std::to_string(cfg.train.max_epochs) +
      " max_validation_failures=" +
      std::to_string(cfg.train.max_validation_failures) +
      " validation_fraction=" + format_compact(cfg.train.validation_fraction) +
      " learning_rate=" + format_compact(cfg.train.learning_rate) +
      " init_scale=" + format_compact(cfg.train.init_scale) +
      " residual_features=" +
      (cfg.train.residual_features ? std::string("true") : std::string("false")));
  lines.push_back("seed=" + std::to_string(cfg.seed) +
                  " train_stream_seed=" + std::to_string(train_seed) +
                  " test_seed=" + std::to_string(test_seed) +
                  " nn_seed=" + std::to_string(nn_seed));
  return lines;
}

inline std::string curve_csv(const LearningCurve& curve,
                             const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& line : comments) out += "# " + line + "\n";
  out += "second,total_error,alpha,beta\n";
  for (const auto& p : curve) {
    out += std::to_string(p.second);
    out += ',' + lvs::detail::format_fixed6(p.total_error);
    out += ',' + lvs::detail::format_opt6(p.alpha);
    out += ',' + lvs::detail::format_opt6(p.beta);
    out += '\n';
  }
  return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows,
                               const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& line : comments) out += "# " + line + "\n";
  out += summary_csv_header() + "\n";
  for (const auto& row : rows) out += summary_csv_row(row) + "\n";
  return out;
}

inline std::filesystem::path out_path(const ExperimentConfig& cfg,
                                      const std::string& name) {
  return std::filesystem::path(cfg.output_dir) / name;
}

// Stream-role tags for per-cell seed derivation.
inline constexpr std::uint64_t kTagTrainStream = 1;
inline constexpr std::uint64_t kTagTestSet = 2;
inline constexpr std::uint64_t kTagNnInit = 3;

}  // namespace detail

/// Learning curves under changing NLoS bias at Po=0.5, plus the matching
/// LRT reference errors. Emits fig2_nlos<k>.csv per NLoS value and
/// fig2_lrt.csv.
inline void run_fig2(const ExperimentConfig& cfg) {
  cfg.validate();
  const Scenario sc = resolve_scenario(cfg.scenario_preset);
  std::vector<SummaryRow> lrt_rows;
  std::vector<std::string> lrt_comments;
  lrt_comments.push_back("cell=fig2_lrt");
  lrt_comments.push_back("scenario=" + cfg.scenario_preset +
                         " n_bs=" + std::to_string(sc.n_bs()));
  lrt_comments.push_back("sigma_ns=" +
                         detail::format_compact(cfg.thermal_noise_std_ns) +
                         " po_test=0.5 n_test=" + std::to_string(cfg.n_test));
  lrt_comments.push_back("seed=" + std::to_string(cfg.seed));

  for (std::size_t i = 0; i < cfg.nlos_std_ns.size(); ++i) {
    const double nlos = cfg.nlos_std_ns[i];
    const ChannelParams params{cfg.thermal_noise_std_ns, nlos, 0.0};
    const std::uint64_t nlos_tag = static_cast<std::uint64_t>(i);
    const std::uint64_t train_seed =
        derive_seed(cfg.seed, {2, nlos_tag, detail::kTagTrainStream});
    const std::uint64_t test_seed =
        derive_seed(cfg.seed, {2, nlos_tag, detail::kTagTestSet});
    const std::uint64_t nn_seed =
        derive_seed(cfg.seed, {2, nlos_tag, detail::kTagNnInit});

    const Dataset stream = generate_dataset(
        sc, params, static_cast<std::size_t>(cfg.max_seconds), cfg.po_train,
        train_seed);
    const Dataset test = generate_dataset(
        sc, params, static_cast<std::size_t>(cfg.n_test), 0.5, test_seed);

    TrainConfig tc = cfg.train;
    tc.seed = nn_seed;
    const LearningCurve curve =
        incremental_training_run(stream, test, tc, cfg.max_seconds);

    const auto comments = detail::cell_comment_lines(
        cfg, "fig2", sc, nlos, 0.5, train_seed, test_seed, nn_seed);
    detail::atomic_write_file(
        detail::out_path(cfg, "fig2_nlos" + detail::format_compact(nlos) + ".csv")
            .string(),
        detail::curve_csv(curve, comments));

    const LrtDetector det{cfg.thermal_noise_std_ns, 1.0};
    SummaryRow row{"lrt", static_cast<int>(sc.n_bs()), cfg.thermal_noise_std_ns,
                   nlos, 0.5, evaluate_lrt(det, test)};
    lrt_rows.push_back(row);
    lrt_comments.push_back("nlos_ns=" + detail::format_compact(nlos) +
                           " test_seed=" + std::to_string(test_seed));
  }
  detail::atomic_write_file(detail::out_path(cfg, "fig2_lrt.csv").string(),
                            detail::summary_csv(lrt_rows, lrt_comments));
}

namespace detail {

/// Shared engine for the Po studies: one Po=0.5 train stream at the given
/// NLoS level, learning curves for every po_test value (the per-second
/// retraining is shared across them), plus the Po=0.5 LRT reference.
inline void run_po_study(const ExperimentConfig& cfg, int fig_no, double nlos,
                         const Scenario& sc) {
  const ChannelParams params{cfg.thermal_noise_std_ns, nlos, 0.0};
  const std::uint64_t fig_tag = static_cast<std::uint64_t>(fig_no);
  const std::uint64_t train_seed =
      derive_seed(cfg.seed, {fig_tag, kTagTrainStream});
  const std::uint64_t nn_seed = derive_seed(cfg.seed, {fig_tag, kTagNnInit});

  const Dataset stream = generate_dataset(
      sc, params, static_cast<std::size_t>(cfg.max_seconds), cfg.po_train,
      train_seed);

  std::vector<Dataset> tests;
  std::vector<std::uint64_t> test_seeds;
  tests.reserve(cfg.po_test.size());
  for (std::size_t k = 0; k < cfg.po_test.size(); ++k) {
    test_seeds.push_back(
        derive_seed(cfg.seed, {fig_tag, kTagTestSet, static_cast<std::uint64_t>(k)}));
    tests.push_back(generate_dataset(sc, params,
                                     static_cast<std::size_t>(cfg.n_test),
                                     cfg.po_test[k], test_seeds.back()));
  }
  std::vector<const Dataset*> test_ptrs;
  for (const auto& t : tests) test_ptrs.push_back(&t);

  TrainConfig tc = cfg.train;
  tc.seed = nn_seed;
  const std::vector<LearningCurve> curves =
      incremental_training_run_multi(stream, test_ptrs, tc, cfg.max_seconds);

  const std::string fig = "fig" + std::to_string(fig_no);
  for (std::size_t k = 0; k < cfg.po_test.size(); ++k) {
    const auto comments =
        cell_comment_lines(cfg, fig, sc, nlos, cfg.po_test[k], train_seed,
                           test_seeds[k], nn_seed);
    atomic_write_file(
        out_path(cfg, fig + "_po" + format_compact(cfg.po_test[k]) + ".csv")
            .string(),
        curve_csv(curves[k], comments));
  }

  // LRT reference at Po=0.5 (generated on demand when 0.5 is not swept).
  const Dataset* ref = nullptr;
  std::uint64_t ref_seed = 0;
  Dataset ref_store;
  for (std::size_t k = 0; k < cfg.po_test.size(); ++k) {
    if (cfg.po_test[k] == 0.5) {
      ref = &tests[k];
      ref_seed = test_seeds[k];
      break;
    }
  }
  if (!ref) {
    ref_seed = derive_seed(cfg.seed, {fig_tag, kTagTestSet, 0xffffu});
    ref_store = generate_dataset(
        sc, params, static_cast<std::size_t>(cfg.n_test), 0.5, ref_seed);
    ref = &ref_store;
  }
  const LrtDetector det{cfg.thermal_noise_std_ns, 1.0};
  SummaryRow row{"lrt", static_cast<int>(sc.n_bs()), cfg.thermal_noise_std_ns,
                 nlos, 0.5, evaluate_lrt(det, *ref)};
  auto comments = cell_comment_lines(cfg, fig + "_lrt", sc, nlos, 0.5,
                                     train_seed, ref_seed, nn_seed);
  atomic_write_file(out_path(cfg, fig + "_lrt.csv").string(),
                    summary_csv({row}, comments));
}

}  // namespace detail

/// Po study at NLoS 300 ns, 4 BSs.
inline void run_fig3(const ExperimentConfig& cfg) {
  cfg.validate();
  detail::run_po_study(cfg, 3, 300.0, resolve_scenario(cfg.scenario_preset));
}

/// Po study at NLoS 500 ns, 4 BSs.
inline void run_fig4(const ExperimentConfig& cfg) {
  cfg.validate();
  detail::run_po_study(cfg, 4, 500.0, resolve_scenario(cfg.scenario_preset));
}

/// Po study at NLoS 500 ns with the 6-BS layout.
inline void run_fig5(const ExperimentConfig& cfg) {
  cfg.validate();
  detail::run_po_study(cfg, 5, 500.0, Scenario::corners6());
}

inline void run_all(const ExperimentConfig& cfg) {
  run_fig2(cfg);
  run_fig3(cfg);
  run_fig4(cfg);
  run_fig5(cfg);
}

}  // namespace lvs
