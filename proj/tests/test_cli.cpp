#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "andnmf/config.hpp"
#include "andnmf/errors.hpp"
#include "andnmf/harness.hpp"
#include "andnmf/io.hpp"
#include "andnmf/weights.hpp"

namespace andnmf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "andnmf_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig small(const std::string& preset) {
  auto cfg = preset_config(preset);
  cfg.dataset.w = 40;
  cfg.dataset.d = 5;
  cfg.dataset.n = 300;
  cfg.dataset.weights.alpha_total = 1.25;
  for (auto& s : cfg.solvers) {
    s.and_config.stages = 3;
    s.and_config.iters_per_stage = 10;
  }
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ANDNMF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string without_seconds(const fs::path& trace) {
  std::string out;
  std::istringstream in(io::read_text(trace));
  std::string line;
  while (std::getline(in, line)) {
    auto fields = line;
    // Third field is wall time.
    const auto a = fields.find(',', fields.find(',') + 1);
    const auto b = fields.find(',', a + 1);
    out += fields.substr(0, a) + fields.substr(b) + "\n";
  }
  return out;
}

TEST(Generate, RerunIsBitwiseIdentical) {
  const auto cfg = small("DIR");
  const auto a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  const json ma = cli_generate(cfg, a);
  cli_generate(cfg, b);
  for (const char* f : {kTruthFile, kWeightsFile, kObservationsFile, kNoiseFile, kInitFile})
    EXPECT_EQ(io::read_text(a / f), io::read_text(b / f)) << f;
  EXPECT_EQ(io::read_text(a / kManifestFile), io::read_text(b / kManifestFile));
  EXPECT_EQ(ma.at("seeds").at("master").get<std::uint64_t>(), cfg.seed);
  EXPECT_EQ(ma.at("ground_truth").at("provenance"), "random-uniform-nonneg");
  EXPECT_TRUE(ma.at("weights").at("gcc_closed_form").contains("r"));
  EXPECT_EQ(ma.at("files").size(), 5u);
}

TEST(Generate, PresetShapes) {
  const auto dir = fresh_dir("gen_dir");
  cli_generate(small("DIR"), dir);
  const auto x = io::read_matrix(dir / kWeightsFile);
  for (Index j = 0; j < x.cols(); ++j) EXPECT_NEAR(x.values().col(j).sum(), 1.0, 1e-12);

  const auto neg = fresh_dir("gen_neg");
  const json m = cli_generate(small("NEG"), neg);
  const auto a = io::read_matrix(neg / kTruthFile);
  EXPECT_GE(a.values().minCoeff(), -0.5);
  EXPECT_LT(a.values().maxCoeff(), 0.5);
  EXPECT_TRUE(m.at("weights").at("gcc_closed_form").contains("unavailable"));
}

TEST(Run, TwoSolversShareTraceSchema) {
  auto cfg = small("DIR");
  SolverEntry hals;
  hals.name = hals.label = "hals";
  hals.baseline.outer_iters = 20;
  cfg.solvers.push_back(hals);
  const auto dir = fresh_dir("run_two");
  cli_generate(cfg, dir);
  const auto outcome = cli_run(cfg, dir, 2);
  EXPECT_EQ(outcome.exit_code, kExitOk);
  ASSERT_EQ(outcome.solvers.size(), 2u);
  for (const auto& s : outcome.solvers) {
    EXPECT_EQ(s.status, "ok") << s.message;
    const std::string text = io::read_text(s.trace_file);
    EXPECT_EQ(text.substr(0, text.find('\n')), io::kTraceHeader);
    EXPECT_TRUE(fs::exists(s.a_final_file));
  }
  EXPECT_LT(outcome.solvers[0].final_error, outcome.solvers[0].initial_error);
  const json summary = json::parse(io::read_text(dir / kSummaryFile));
  EXPECT_EQ(summary.at("solvers").size(), 2u);
}

TEST(Run, MuRefusesSignedData) {
  auto cfg = small("NEG");
  cfg.solvers[0].name = cfg.solvers[0].label = "mu";
  cfg.solvers[0].baseline.algorithm = BaselineAlgorithm::kMu;
  const auto dir = fresh_dir("run_mu");
  cli_generate(cfg, dir);
  const auto outcome = cli_run(cfg, dir);
  EXPECT_EQ(outcome.exit_code, kExitValidation);
  EXPECT_EQ(outcome.solvers[0].status, "refused");
  EXPECT_NE(outcome.solvers[0].message.find("unsupported by MU"), std::string::npos);
}

TEST(Run, DivergenceIsReported) {
  auto cfg = small("DIR");
  cfg.solvers[0].and_config.eta = 1e3;
  const auto dir = fresh_dir("run_div");
  cli_generate(cfg, dir);
  const auto outcome = cli_run(cfg, dir);
  EXPECT_EQ(outcome.exit_code, kExitRuntime);
  EXPECT_EQ(outcome.solvers[0].status, "diverged");
}

TEST(Run, MissingDatasetIsIoError) {
  EXPECT_THROW(cli_run(small("DIR"), fresh_dir("run_missing")), IoError);
}

TEST(Run, RepeatedRunsMatchApartFromTiming) {
  const auto cfg = small("CTM");
  const auto dir = fresh_dir("run_repeat");
  cli_generate(cfg, dir);
  cli_run(cfg, dir);
  const std::string first = without_seconds(dir / "and.trace.csv");
  const std::string first_a = io::read_text(dir / "and.A_final.mat");
  cli_run(cfg, dir);
  EXPECT_EQ(without_seconds(dir / "and.trace.csv"), first);
  EXPECT_EQ(io::read_text(dir / "and.A_final.mat"), first_a);
}

TEST(Eval, GroundTruthAndScaledPermutation) {
  const auto dir = fresh_dir("eval");
  cli_generate(small("DIR"), dir);
  const auto truth = dir / kTruthFile;
  EXPECT_EQ(cli_eval(truth, truth).total, 0.0);

  const Eigen::MatrixXd a = io::read_matrix(truth).values();
  Eigen::MatrixXd shuffled(a.rows(), a.cols());
  for (Index i = 0; i < a.cols(); ++i) shuffled.col(i) = a.col((i + 2) % a.cols()) * (0.5 + i);
  io::write_matrix(dir / "est.mat", DenseMatrix(shuffled));
  const auto report = cli_eval(dir / "est.mat", truth, dir / "report.json");
  EXPECT_LE(report.total, 1e-12);
  const json j = json::parse(io::read_text(dir / "report.json"));
  EXPECT_EQ(j.at("matches")[0].get<Index>(), 3);
}

TEST(Gcc, EmpiricalReports) {
  const auto dir = fresh_dir("gcc");
  cli_generate(small("DIR"), dir);
  const json dir_report = cli_gcc(dir / kWeightsFile);
  EXPECT_LE(dir_report.at("params").at("r").get<double>(), 1.0 + 1e-9);

  io::write_matrix(dir / "bin3.mat", sample_weights(WeightSpec::sparse_binary(6, 3, 1), 500));
  const json bin = cli_gcc(dir / "bin3.mat");
  EXPECT_DOUBLE_EQ(bin.at("params").at("r").get<double>(), 3.0);
  EXPECT_EQ(bin.at("decay").at("fitted_q"), "inf");

  io::write_matrix(dir / "bin2.mat", sample_weights(WeightSpec::sparse_binary(4, 2, 2), 100000));
  const json b2 = cli_gcc(dir / "bin2.mat", dir / "gcc.json");
  EXPECT_NEAR(b2.at("params").at("m").get<double>(), 8.0 / 3.0, 0.1 * 8.0 / 3.0);
  EXPECT_TRUE(fs::exists(dir / "gcc.json"));
}

TEST(Binary, ExitCodes) {
  const auto dir = fresh_dir("binary");
  const std::string out = " --out " + dir.string();
  std::ofstream(dir / "small.json") << R"({"dataset": {"W": 30, "D": 4, "n": 200},
    "solvers": [{"name": "and", "stages": 2, "iters_per_stage": 5}]})";
  const std::string config = " --config " + (dir / "small.json").string();

  EXPECT_EQ(run_cli("generate" + config + out), 0);
  EXPECT_TRUE(fs::exists(dir / kManifestFile));
  EXPECT_EQ(run_cli("run --jobs 1" + config + out), 0);
  EXPECT_TRUE(fs::exists(dir / "and.trace.csv"));
  EXPECT_EQ(run_cli("eval " + (dir / kTruthFile).string() + " " + (dir / kTruthFile).string()), 0);
  EXPECT_EQ(run_cli("gcc " + (dir / kWeightsFile).string()), 0);

  std::ofstream(dir / "bad.json") << "{\n  \"dataset\": {\"Dd\": 3}\n}\n";
  EXPECT_EQ(run_cli("generate --config " + (dir / "bad.json").string() + out), 1);
  EXPECT_EQ(run_cli("generate --preset NOPE" + out), 1);
  EXPECT_EQ(run_cli("run --preset DIR --out " + (dir / "nothing").string()), 3);
  EXPECT_EQ(run_cli("eval " + (dir / "missing.mat").string() + " " + (dir / kTruthFile).string()), 3);
  EXPECT_NE(run_cli("frobnicate"), 0);
}

}  // namespace
}  // namespace andnmf
