#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "andnmf/baselines.hpp"
#include "andnmf/solver.hpp"
#include "andnmf/synth.hpp"
#include "andnmf/weights.hpp"

namespace andnmf {

// Weight distribution as written in a config. Dimension-dependent quantities
// (Dirichlet concentration, covariance) are resolved against D when the
// dataset is built, so changing D keeps the family's character.
struct WeightsConfig {
  std::string family = "dirichlet";  // dirichlet | logistic_normal | sparse_binary | sparse_uniform
  double alpha_total = 5.0;          // dirichlet: concentration alpha_total / D per coordinate
  std::optional<double> concentration;  // dirichlet: explicit per-coordinate value, overrides alpha_total
  double rho = 0.5;                  // logistic_normal
  Index support = 3;                 // sparse_binary, sparse_uniform
  double floor = 0.1;                // sparse_uniform
  double ceiling = 1.0;              // sparse_uniform
};

struct DatasetConfig {
  Index w = 200;
  Index d = 20;
  Index n = 2000;
  double gamma = 0.0;
  GroundTruthKind truth_kind = GroundTruthKind::kNonnegative;
  WeightsConfig weights;
};

struct SolverEntry {
  std::string name = "and";  // and | mu | hals | anls
  std::string label;         // output file stem; defaults to name, deduplicated
  AndConfig and_config;
  BaselineConfig baseline;
};

struct ExperimentConfig {
  std::string preset = "DIR";
  std::uint64_t seed = 1;
  DatasetConfig dataset;
  InitSpec init;
  std::vector<SolverEntry> solvers;
  std::optional<Index> eval_every;  // unset: every iteration for D <= 50, else every 10
  std::filesystem::path output = "out";

  Index effective_eval_every() const;

  std::uint64_t truth_seed() const;
  std::uint64_t weights_seed() const;
  std::uint64_t noise_seed() const;
  std::uint64_t init_seed() const;
  std::uint64_t solver_seed(std::size_t index) const;

  WeightSpec weight_spec() const;
  NoiseSpec noise_spec() const;
  InitSpec init_spec() const;  // with the derived seed filled in
};

// Preset names: DIR, CTM, NEG, NOISE, BINARY, paper-scale.
const std::vector<std::string>& preset_names();
ExperimentConfig preset_config(std::string_view name);

// Validates dimensions, solver list and every nested block. Throws ValidationError.
void validate(const ExperimentConfig& cfg);

// JSON document to config. Keys absent from the document keep the preset's
// values; unknown keys are rejected. Diagnostics read "<source>:<line>: <path>: ...".
// `preset_override` replaces the document's "preset" key when given.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>",
                              std::optional<std::string> preset_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::string> preset_override = std::nullopt);

// Canonical, fully expanded form. Parsing it back yields the same config.
nlohmann::json to_json(const ExperimentConfig& cfg);

// 64-bit FNV-1a of the canonical JSON dump, output directory excluded.
std::uint64_t config_hash(const ExperimentConfig& cfg);

std::string to_string(const ThresholdSchedule& schedule);

}  // namespace andnmf
