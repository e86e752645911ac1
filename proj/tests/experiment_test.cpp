#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "lvs/experiment.hpp"

using namespace lvs;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const std::string& contents) {
  std::istringstream in(contents);
  std::string line;
  std::size_t rows = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

ExperimentConfig mini_config(const std::string& outdir) {
  ExperimentConfig cfg;
  cfg.n_test = 150;
  cfg.max_seconds = 3;
  cfg.nlos_std_ns = {250.0};
  cfg.po_test = {0.5, 0.2};
  cfg.seed = 99;
  cfg.output_dir = outdir;
  return cfg;
}

}  // namespace

TEST_CASE("experiment config JSON round trip and overrides") {
  ExperimentConfig cfg;
  cfg.scenario_preset = "bs6";
  cfg.nlos_std_ns = {100.0, 200.0};
  cfg.po_test = {0.4};
  cfg.n_test = 777;
  cfg.seed = 31337;
  cfg.train.learning_rate = 0.25;
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.scenario_preset == "bs6");
  CHECK(back.nlos_std_ns == cfg.nlos_std_ns);
  CHECK(back.po_test == cfg.po_test);
  CHECK(back.n_test == 777);
  CHECK(back.seed == 31337);
  CHECK(back.train.learning_rate == 0.25);

  SUBCASE("partial JSON keeps defaults") {
    const ExperimentConfig partial =
        config_from_json(nlohmann::json::parse(R"({"n_test": 42})"));
    CHECK(partial.n_test == 42);
    CHECK(partial.max_seconds == 400);
    const std::vector<double> default_po{0.5, 0.1, 0.01, 0.0005};
    CHECK(partial.po_test == default_po);
  }
  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_test": 0})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        config_from_json(nlohmann::json::parse(R"({"po_test": [1.5]})")),
        std::invalid_argument);
  }
}

TEST_CASE("scenario preset resolution") {
  CHECK(resolve_scenario("bs4").n_bs() == 4);
  CHECK(resolve_scenario("bs6").n_bs() == 6);
  CHECK_THROWS_AS(resolve_scenario("bs5"), std::runtime_error);

  const auto path =
      std::filesystem::temp_directory_path() / "lvs_scenario_test.json";
  {
    std::ofstream out(path);
    out << scenario_to_json(Scenario::corners4()).dump();
  }
  CHECK(resolve_scenario(path.string()).n_bs() == 4);
}

TEST_CASE("fig2 miniature run emits curves and references") {
  const auto outdir =
      std::filesystem::temp_directory_path() / "lvs_fig2_test";
  std::filesystem::remove_all(outdir);
  const ExperimentConfig cfg = mini_config(outdir.string());
  run_fig2(cfg);

  const auto curve_path = outdir / "fig2_nlos250.csv";
  const auto lrt_path = outdir / "fig2_lrt.csv";
  REQUIRE(std::filesystem::exists(curve_path));
  REQUIRE(std::filesystem::exists(lrt_path));

  const std::string curve = slurp(curve_path);
  CHECK(data_rows(curve) == 3);
  CHECK(curve.find("second,total_error,alpha,beta") != std::string::npos);
  CHECK(curve.find("# ") == 0);
  CHECK(curve.find("seed=99") != std::string::npos);

  const std::string lrt = slurp(lrt_path);
  CHECK(data_rows(lrt) == 1);
  CHECK(lrt.find(summary_csv_header()) != std::string::npos);
  CHECK(lrt.find("lrt,4,") != std::string::npos);

  SUBCASE("rerunning with the same seed overwrites identical bytes") {
    run_fig2(cfg);
    CHECK(slurp(curve_path) == curve);
    CHECK(slurp(lrt_path) == lrt);
  }
}

TEST_CASE("po-study miniature runs emit one curve per po") {
  const auto outdir = std::filesystem::temp_directory_path() / "lvs_fig3_test";
  std::filesystem::remove_all(outdir);
  const ExperimentConfig cfg = mini_config(outdir.string());
  run_fig3(cfg);

  REQUIRE(std::filesystem::exists(outdir / "fig3_po0.5.csv"));
  REQUIRE(std::filesystem::exists(outdir / "fig3_po0.2.csv"));
  REQUIRE(std::filesystem::exists(outdir / "fig3_lrt.csv"));
  CHECK(data_rows(slurp(outdir / "fig3_po0.5.csv")) == 3);
  CHECK(data_rows(slurp(outdir / "fig3_po0.2.csv")) == 3);

  SUBCASE("fig5 uses the 6-BS layout") {
    run_fig5(cfg);
    const std::string lrt = slurp(outdir / "fig5_lrt.csv");
    CHECK(lrt.find("lrt,6,") != std::string::npos);
  }
}
