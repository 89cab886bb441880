#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "andnmf/config.hpp"
#include "andnmf/metrics.hpp"

namespace andnmf {

// Process exit codes shared by the CLI and the harness.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitIo = 3;

std::string build_id();

// Dataset file names inside an output directory.
inline constexpr const char* kTruthFile = "A_star.mat";
inline constexpr const char* kWeightsFile = "X.mat";
inline constexpr const char* kObservationsFile = "Y.mat";
inline constexpr const char* kNoiseFile = "Zeta.mat";
inline constexpr const char* kInitFile = "A0.mat";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kSummaryFile = "summary.json";

// Writes the five dataset matrices and manifest.json into `out`.
// Returns the manifest.
nlohmann::json cli_generate(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct SolverOutcome {
  std::string label;
  std::string name;
  std::string status;  // "ok", "diverged" or "refused"
  std::string message;
  double initial_error = 0.0;
  double final_error = 0.0;
  double seconds = 0.0;
  std::filesystem::path trace_file;
  std::filesystem::path a_final_file;
};

struct RunOutcome {
  std::vector<SolverOutcome> solvers;
  int exit_code = kExitOk;  // kExitRuntime if any solver diverged, kExitValidation if any refused
};

// Reads the dataset from `out` (written by cli_generate), runs every solver
// and writes <label>.trace.csv, <label>.A_final.mat and summary.json.
// `jobs` > 1 runs solvers concurrently.
RunOutcome cli_run(const ExperimentConfig& cfg, const std::filesystem::path& out, int jobs = 1);

// Correlation error of an estimate against the ground truth. Writes the
// report to `report_path` when it is non-empty.
ErrorReport cli_eval(const std::filesystem::path& estimate, const std::filesystem::path& truth,
                     const std::filesystem::path& report_path = {});

// Empirical GCC parameters, raw moments and decay profile of a weight matrix.
nlohmann::json cli_gcc(const std::filesystem::path& weights, const std::filesystem::path& report_path = {},
                       const std::vector<double>& alphas = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8});

}  // namespace andnmf
