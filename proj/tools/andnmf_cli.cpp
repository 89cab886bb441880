#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "andnmf/config.hpp"
#include "andnmf/errors.hpp"
#include "andnmf/harness.hpp"
#include "andnmf/io.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Experiment config (JSON)");
  cmd->add_option("--preset", opts.preset, "Preset: DIR, CTM, NEG, NOISE, BINARY, paper-scale");
  cmd->add_option("--out", opts.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", opts.seed, "Master seed override");
}

andnmf::ExperimentConfig resolve(const CommonOptions& opts) {
  std::optional<std::string> preset;
  if (!opts.preset.empty()) preset = opts.preset;
  andnmf::ExperimentConfig cfg =
      opts.config.empty() ? andnmf::preset_config(preset.value_or("DIR")) : andnmf::load_config(opts.config, preset);
  if (opts.seed) cfg.seed = *opts.seed;
  if (!opts.out.empty()) cfg.output = opts.out;
  andnmf::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AND nonnegative matrix factorization: data generation, solvers and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", andnmf::build_id());

  CommonOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "Write A_star, X, Y, Zeta, A0 and manifest.json");
  add_common(gen, gen_opts);

  CommonOptions run_opts;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run the configured solvers on a generated dataset");
  add_common(run, run_opts);
  run->add_option("--jobs", jobs, "Solvers to run in parallel")->check(CLI::PositiveNumber);

  std::string estimate, truth, eval_out;
  auto* eval = app.add_subcommand("eval", "Correlation error of an estimate against a ground truth");
  eval->add_option("estimate", estimate, "Estimated feature matrix")->required();
  eval->add_option("truth", truth, "Ground-truth feature matrix")->required();
  eval->add_option("--out", eval_out, "Report path (default: stdout)");

  std::string weights, gcc_out;
  std::vector<double> alphas = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8};
  auto* gcc = app.add_subcommand("gcc", "Empirical correlation parameters and decay profile of a weight matrix");
  gcc->add_option("weights", weights, "Weight matrix (D x n)")->required();
  gcc->add_option("--out", gcc_out, "Report path (default: stdout)");
  gcc->add_option("--alphas", alphas, "Decay grid, values in (0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? andnmf::kExitOk : andnmf::kExitValidation;
  }

  try {
    if (*gen) {
      const auto cfg = resolve(gen_opts);
      andnmf::cli_generate(cfg, cfg.output);
      std::cout << "wrote dataset to " << cfg.output.string() << "\n";
      return andnmf::kExitOk;
    }
    if (*run) {
      const auto cfg = resolve(run_opts);
      const auto outcome = andnmf::cli_run(cfg, cfg.output, jobs);
      for (const auto& s : outcome.solvers) {
        std::cout << s.label << ": " << s.status << " error " << s.initial_error << " -> " << s.final_error << " in "
                  << s.seconds << " s\n";
        if (!s.message.empty()) std::cerr << s.label << ": " << s.message << "\n";
      }
      return outcome.exit_code;
    }
    if (*eval) {
      const auto report = andnmf::cli_eval(estimate, truth, eval_out);
      if (eval_out.empty()) std::cout << andnmf::io::to_json(report).dump(2) << "\n";
      return andnmf::kExitOk;
    }
    if (*gcc) {
      const auto report = andnmf::cli_gcc(weights, gcc_out, alphas);
      if (gcc_out.empty()) std::cout << report.dump(2) << "\n";
      return andnmf::kExitOk;
    }
  } catch (const andnmf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return andnmf::kExitValidation;
  } catch (const andnmf::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return andnmf::kExitRuntime;
  } catch (const andnmf::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return andnmf::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return andnmf::kExitRuntime;
  }
  return andnmf::kExitOk;
}
