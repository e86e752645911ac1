// Command-line front end: dataset synthesis, LRT evaluation, NN training,
// learning-curve runs, and the canned figure experiments.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lvs/channel.hpp"
#include "lvs/experiment.hpp"
#include "lvs/lrt.hpp"
#include "lvs/metrics.hpp"
#include "lvs/nn.hpp"
#include "lvs/scenario.hpp"

namespace {

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string opt6(const std::optional<double>& v) {
  return v ? fmt6(*v) : "nan";
}

struct GenerateArgs {
  std::size_t n = 1000;
  double po = 0.5;
  double sigma = 300.0;
  double nlos = 0.0;
  double attacker_bias = 0.0;
  std::string scenario = "bs4";
  std::string out_file;
};

int run_generate(const GenerateArgs& a, std::uint64_t seed,
                 const std::string& out_dir) {
  const lvs::Scenario sc = lvs::resolve_scenario(a.scenario);
  const lvs::ChannelParams params{a.sigma, a.nlos, a.attacker_bias};
  const lvs::Dataset ds = lvs::generate_dataset(sc, params, a.n, a.po, seed);

  const std::string path =
      a.out_file.empty()
          ? (std::filesystem::path(out_dir) / "dataset.csv").string()
          : a.out_file;
  std::vector<std::string> comments{
      "generate n=" + std::to_string(a.n) + " po=" + std::to_string(a.po),
      "scenario=" + a.scenario + " n_bs=" + std::to_string(sc.n_bs()),
      "sigma_ns=" + fmt6(a.sigma) + " nlos_ns=" + fmt6(a.nlos) +
          " attacker_bias_ns=" + fmt6(a.attacker_bias),
      "seed=" + std::to_string(seed)};
  lvs::write_dataset_csv(ds, path, comments);
  lvs::write_dataset_meta(ds, sidecar_path(path));
  std::cout << "wrote " << path << " and " << sidecar_path(path) << " (n=" << a.n
            << ", malicious=" << ds.malicious_count() << ")\n";
  return 0;
}

struct EvalLrtArgs {
  std::string data;
  double sigma = 0.0;  // 0 = take from sidecar, else 300
  double lambda = 1.0;
  std::string decisions_out;
};

int run_eval_lrt(const EvalLrtArgs& a) {
  lvs::Dataset ds = lvs::read_dataset_csv(a.data);
  double sigma = a.sigma;
  if (sigma <= 0.0) {
    const std::string meta = sidecar_path(a.data);
    if (std::filesystem::exists(meta)) {
      sigma = lvs::read_dataset_meta(meta).thermal_noise_std_ns;
    } else {
      sigma = 300.0;
    }
  }
  const lvs::LrtDetector det{sigma, a.lambda};
  const auto decisions = lvs::decide_dataset(det, ds);

  std::vector<lvs::Verdict> verdicts;
  std::size_t undecidable = 0;
  for (const auto& d : decisions) {
    verdicts.push_back(d.verdict);
    undecidable += d.undecidable_geometry ? 1 : 0;
  }
  const lvs::MetricsReport r = lvs::compute_metrics(verdicts, ds.labels(), 0.5);
  std::cout << "method=lrt sigma_ns=" << fmt6(sigma) << " lambda=" << a.lambda
            << " alpha=" << opt6(r.alpha) << " beta=" << opt6(r.beta)
            << " total_error=" << opt6(r.total_error) << " n=" << r.n_total()
            << " undecidable_geometry=" << undecidable << "\n";

  if (!a.decisions_out.empty()) {
    lvs::write_dataset_csv(ds, a.decisions_out,
                           {"lrt decisions for " + a.data,
                            "sigma_ns=" + fmt6(sigma) +
                                " lambda=" + std::to_string(a.lambda)},
                           &verdicts);
    std::cout << "wrote " << a.decisions_out << "\n";
  }
  return 0;
}

struct TrainNnArgs {
  std::string data;
  std::string model_out;
  lvs::TrainConfig cfg;
};

int run_train_nn(const TrainNnArgs& a, std::uint64_t seed) {
  lvs::Dataset ds = lvs::read_dataset_csv(a.data);
  lvs::TrainConfig cfg = a.cfg;
  cfg.seed = seed;
  lvs::TrainTrace trace;
  const lvs::MlpModel m = lvs::train(ds, cfg, &trace);
  lvs::save_model(m, a.model_out);
  std::cout << "trained on " << ds.size() << " samples, epochs="
            << trace.epochs.size() << ", best_epoch=" << trace.best_epoch
            << (trace.used_validation ? "" : " (no validation split)")
            << "; wrote " << a.model_out << "\n";
  return 0;
}

struct CurveArgs {
  std::string train_path;
  std::string test_path;
  int seconds = 0;  // 0 = length of the train stream
  std::string out_file;
  lvs::TrainConfig cfg;
};

int run_curve(const CurveArgs& a, std::uint64_t seed,
              const std::string& out_dir) {
  const lvs::Dataset stream = lvs::read_dataset_csv(a.train_path);
  const lvs::Dataset test = lvs::read_dataset_csv(a.test_path);
  const int seconds =
      a.seconds > 0 ? a.seconds : static_cast<int>(stream.size());
  lvs::TrainConfig cfg = a.cfg;
  cfg.seed = seed;
  const lvs::LearningCurve curve =
      lvs::incremental_training_run(stream, test, cfg, seconds);

  const std::string path =
      a.out_file.empty()
          ? (std::filesystem::path(out_dir) / "curve.csv").string()
          : a.out_file;
  std::vector<std::string> comments{
      "curve train=" + a.train_path + " test=" + a.test_path,
      "seconds=" + std::to_string(seconds) + " seed=" + std::to_string(seed),
      "train: max_epochs=" + std::to_string(cfg.max_epochs) +
          " max_validation_failures=" +
          std::to_string(cfg.max_validation_failures) +
          " validation_fraction=" + std::to_string(cfg.validation_fraction) +
          " learning_rate=" + std::to_string(cfg.learning_rate) +
          " init_scale=" + std::to_string(cfg.init_scale)};
  lvs::detail::atomic_write_file(path, lvs::detail::curve_csv(curve, comments));
  std::cout << "wrote " << path << " (" << curve.size() << " rows, final xi="
            << fmt6(curve.back().total_error) << ")\n";
  return 0;
}

void add_train_flags(CLI::App* sub, lvs::TrainConfig& cfg) {
  sub->add_option("--epochs", cfg.max_epochs, "Max training epochs");
  sub->add_option("--max-val-failures", cfg.max_validation_failures,
                  "Consecutive validation failures that stop training");
  sub->add_option("--val-fraction", cfg.validation_fraction,
                  "Validation split fraction in [0,1)");
  sub->add_option("--lr", cfg.learning_rate,
                  "Initial Levenberg-Marquardt damping");
  sub->add_option("--init-scale", cfg.init_scale,
                  "Uniform weight init half-range");
  sub->add_flag("--residual", cfg.residual_features,
                "Train on Y-U residual features instead of [U;Y]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ToA location-verification simulation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  std::string config_path;
  std::string out_dir = "out";
  app.add_option("--seed", seed, "Base seed for every random stream");
  app.add_option("--config", config_path, "Experiment config JSON");
  app.add_option("--out", out_dir, "Output directory");

  GenerateArgs gen;
  auto* sub_gen = app.add_subcommand("generate", "Synthesize a labeled dataset CSV");
  sub_gen->add_option("--n", gen.n, "Number of samples");
  sub_gen->add_option("--po", gen.po, "Malicious fraction in [0,1]");
  sub_gen->add_option("--sigma", gen.sigma, "Thermal noise std (ns)");
  sub_gen->add_option("--nlos", gen.nlos, "NLoS bias std (ns)");
  sub_gen->add_option("--attacker-bias", gen.attacker_bias,
                      "Attacker common bias std (ns)");
  sub_gen->add_option("--scenario", gen.scenario,
                      "bs4, bs6, or scenario JSON path");
  sub_gen->add_option("--out-file", gen.out_file,
                      "Dataset CSV path (default <out>/dataset.csv)");

  EvalLrtArgs ev;
  auto* sub_ev = app.add_subcommand("eval-lrt", "Run the LRT verifier on a dataset CSV");
  sub_ev->add_option("--data", ev.data, "Dataset CSV")->required();
  sub_ev->add_option("--sigma", ev.sigma,
                     "Detector noise std (ns); defaults to the sidecar value");
  sub_ev->add_option("--lambda", ev.lambda, "Decision threshold");
  sub_ev->add_option("--decisions-out", ev.decisions_out,
                     "Write the dataset with an lrt_decision column here");

  TrainNnArgs tn;
  auto* sub_tn = app.add_subcommand("train-nn", "Train the NN verifier on a dataset CSV");
  sub_tn->add_option("--data", tn.data, "Dataset CSV")->required();
  sub_tn->add_option("--model-out", tn.model_out, "Model JSON path")->required();
  add_train_flags(sub_tn, tn.cfg);

  CurveArgs cv;
  auto* sub_cv = app.add_subcommand(
      "curve", "Incremental one-sample-per-second training curve");
  sub_cv->add_option("--train", cv.train_path, "Training stream CSV")->required();
  sub_cv->add_option("--test", cv.test_path, "Test set CSV")->required();
  sub_cv->add_option("--seconds", cv.seconds,
                     "Curve length (default: full train stream)");
  sub_cv->add_option("--out-file", cv.out_file,
                     "Curve CSV path (default <out>/curve.csv)");
  add_train_flags(sub_cv, cv.cfg);

  // Figure runners share the experiment-config flags.
  lvs::ExperimentConfig overrides;
  std::vector<CLI::App*> fig_subs;
  auto add_fig = [&](const std::string& name, const std::string& desc) {
    auto* s = app.add_subcommand(name, desc);
    s->add_option("--n-test", overrides.n_test, "Test set size");
    s->add_option("--max-seconds", overrides.max_seconds,
                  "Training stream length");
    s->add_option("--sigma", overrides.thermal_noise_std_ns,
                  "Thermal noise std (ns)");
    s->add_option("--nlos", overrides.nlos_std_ns,
                  "NLoS std list (ns), fig2 only");
    s->add_option("--po", overrides.po_test, "Test Po list, fig3/4/5");
    s->add_option("--po-train", overrides.po_train, "Training stream Po");
    s->add_option("--scenario", overrides.scenario_preset,
                  "bs4, bs6, or scenario JSON path");
    fig_subs.push_back(s);
    return s;
  };
  auto* sub_f2 = add_fig("fig2", "Learning curves vs NLoS level plus LRT references");
  auto* sub_f3 = add_fig("fig3", "Po study at NLoS 300 ns, 4 BSs");
  auto* sub_f4 = add_fig("fig4", "Po study at NLoS 500 ns, 4 BSs");
  auto* sub_f5 = add_fig("fig5", "Po study at NLoS 500 ns, 6 BSs");
  auto* sub_all = add_fig("all", "Run fig2 through fig5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sub_gen->parsed()) return run_generate(gen, seed, out_dir);
    if (sub_ev->parsed()) return run_eval_lrt(ev);
    if (sub_tn->parsed()) return run_train_nn(tn, seed);
    if (sub_cv->parsed()) return run_curve(cv, seed, out_dir);

    // figure runners: config file first, then flag overrides
    lvs::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config: " + config_path);
      cfg = lvs::config_from_json(nlohmann::json::parse(in));
    }
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--out")) cfg.output_dir = out_dir;
    CLI::App* fig = nullptr;
    for (CLI::App* s : fig_subs) {
      if (s->parsed()) fig = s;
    }
    if (fig == nullptr) throw std::runtime_error("no subcommand matched");
    if (fig->count("--n-test")) cfg.n_test = overrides.n_test;
    if (fig->count("--max-seconds")) cfg.max_seconds = overrides.max_seconds;
    if (fig->count("--sigma")) {
      cfg.thermal_noise_std_ns = overrides.thermal_noise_std_ns;
    }
    if (fig->count("--nlos")) cfg.nlos_std_ns = overrides.nlos_std_ns;
    if (fig->count("--po")) cfg.po_test = overrides.po_test;
    if (fig->count("--po-train")) cfg.po_train = overrides.po_train;
    if (fig->count("--scenario")) {
      cfg.scenario_preset = overrides.scenario_preset;
    }
    cfg.validate();

    if (sub_f2->parsed()) {
      lvs::run_fig2(cfg);
    } else if (sub_f3->parsed()) {
      lvs::run_fig3(cfg);
    } else if (sub_f4->parsed()) {
      lvs::run_fig4(cfg);
    } else if (sub_f5->parsed()) {
      lvs::run_fig5(cfg);
    } else if (sub_all->parsed()) {
      lvs::run_all(cfg);
    }
    std::cout << "outputs in " << cfg.output_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
