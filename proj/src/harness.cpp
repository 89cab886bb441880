#include "andnmf/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "andnmf/baselines.hpp"
#include "andnmf/errors.hpp"
#include "andnmf/io.hpp"
#include "andnmf/kernels.hpp"
#include "andnmf/solver.hpp"
#include "andnmf/synth.hpp"
#include "andnmf/weights.hpp"

#ifndef ANDNMF_VERSION
#define ANDNMF_VERSION "0.0.0"
#endif

namespace andnmf {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json number_or_tag(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

DenseMatrix read_dataset_matrix(const fs::path& dir, const char* name) {
  const fs::path p = dir / name;
  if (!fs::exists(p)) throw IoError(p.string() + " not found; run `generate` with the same --out first");
  return io::read_matrix(p);
}

json gcc_json(const GccParams& p) {
  return {{"r", p.r},
          {"k", p.k},
          {"m", p.m},
          {"lambda", p.lambda},
          {"q", p.q ? number_or_tag(*p.q) : json("empirical")}};
}

SolverOutcome run_one(const ExperimentConfig& cfg, std::size_t index, const DenseMatrix& a_star,
                      const DenseMatrix& y, const DenseMatrix& a0, const fs::path& out) {
  const SolverEntry& entry = cfg.solvers[index];
  SolverOutcome o;
  o.label = entry.label;
  o.name = entry.name;
  o.trace_file = out / (entry.label + ".trace.csv");
  o.a_final_file = out / (entry.label + ".A_final.mat");

  io::TraceWriter writer(o.trace_file);
  bool have_first = false;
  const TraceSink sink = [&](const TraceRecord& rec) {
    if (!have_first) {
      o.initial_error = rec.total_error;
      have_first = true;
    }
    o.final_error = rec.total_error;
    writer.write(rec);
  };

  const auto start = std::chrono::steady_clock::now();
  try {
    const RunResult result = [&] {
      if (entry.name == "and") {
        AndConfig c = entry.and_config;
        c.seed = cfg.solver_seed(index);
        c.eval_every = cfg.effective_eval_every();
        return run(a0, y, c, &a_star, sink);
      }
      BaselineConfig c = entry.baseline;
      c.seed = cfg.solver_seed(index);
      c.eval_every = cfg.effective_eval_every();
      return run_baseline(c, y, a0, &a_star, sink);
    }();
    io::write_matrix(o.a_final_file, result.a_final);
    o.status = "ok";
  } catch (const DivergenceError& e) {
    o.status = "diverged";
    o.message = e.what();
    o.a_final_file.clear();
  } catch (const ValidationError& e) {
    o.status = "refused";
    o.message = e.what();
    o.a_final_file.clear();
  } catch (const NumericalError& e) {
    o.status = "diverged";
    o.message = e.what();
    o.a_final_file.clear();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return o;
}

}  // namespace

std::string build_id() {
  std::string id = std::string("andnmf ") + ANDNMF_VERSION;
#if defined(__clang__)
  id += " clang " __clang_version__;
#elif defined(__GNUC__)
  id += " gcc " __VERSION__;
#endif
#ifdef ANDNMF_HAVE_OPENMP
  id += " openmp";
#else
  id += " serial";
#endif
  return id;
}

json cli_generate(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  ensure_directory(out);

  const WeightSpec wspec = cfg.weight_spec();
  const GroundTruth gt = generate_ground_truth(cfg.dataset.w, cfg.dataset.d, cfg.dataset.truth_kind, cfg.truth_seed());
  const Dataset data = generate_dataset(gt, wspec, cfg.noise_spec(), cfg.dataset.n);
  const Initialization init = generate_initialization(gt, cfg.init_spec());

  io::write_matrix(out / kTruthFile, gt.a_star);
  io::write_matrix(out / kWeightsFile, data.x);
  io::write_matrix(out / kObservationsFile, data.y);
  io::write_matrix(out / kNoiseFile, data.zeta);
  io::write_matrix(out / kInitFile, init.a0);

  json closed_form;
  try {
    closed_form = gcc_json(gcc_closed_form(wspec));
  } catch (const ValidationError& e) {
    closed_form = {{"unavailable", e.what()}};
  }

  json solver_seeds = json::array();
  for (std::size_t i = 0; i < cfg.solvers.size(); ++i)
    solver_seeds.push_back({{"label", cfg.solvers[i].label}, {"seed", cfg.solver_seed(i)}});

  const NoiseSpec noise = cfg.noise_spec();
  json manifest = {
      {"config", to_json(cfg)},
      {"config_hash", hex64(config_hash(cfg))},
      {"build", build_id()},
      {"seeds",
       {{"master", cfg.seed},
        {"ground_truth", cfg.truth_seed()},
        {"weights", cfg.weights_seed()},
        {"noise", cfg.noise_seed()},
        {"init", cfg.init_seed()},
        {"solvers", solver_seeds}}},
      {"ground_truth", {{"provenance", to_string(gt.provenance)}, {"condition_number", gt.condition_number}}},
      {"weights", {{"family", wspec.family_name()}, {"gcc_closed_form", closed_form}}},
      {"noise", {{"gamma", noise.gamma}, {"gamma1", noise.gamma1(cfg.dataset.w)}, {"gamma2", noise.gamma2()}}},
      {"init", {{"ell", init.ell}, {"rho", init.rho}}},
      {"files", {kTruthFile, kWeightsFile, kObservationsFile, kNoiseFile, kInitFile}}};
  io::write_text(out / kManifestFile, manifest.dump(2) + "\n");
  return manifest;
}

RunOutcome cli_run(const ExperimentConfig& cfg, const fs::path& out, int jobs) {
  validate(cfg);
  if (jobs < 1) throw ValidationError("--jobs must be >= 1");
  const DenseMatrix a_star = read_dataset_matrix(out, kTruthFile);
  const DenseMatrix y = read_dataset_matrix(out, kObservationsFile);
  const DenseMatrix a0 = read_dataset_matrix(out, kInitFile);
  if (y.rows() != a_star.rows() || a0.rows() != a_star.rows() || a0.cols() != a_star.cols())
    throw ValidationError("dataset in " + out.string() + " has inconsistent shapes");

  RunOutcome outcome;
  outcome.solvers.resize(cfg.solvers.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), cfg.solvers.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cfg.solvers.size(); ++i) outcome.solvers[i] = run_one(cfg, i, a_star, y, a0, out);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cfg.solvers.size(); i = next++) {
          try {
            outcome.solvers[i] = run_one(cfg, i, a_star, y, a0, out);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  json solvers = json::array();
  for (const auto& s : outcome.solvers) {
    if (s.status == "diverged") outcome.exit_code = kExitRuntime;
    if (s.status == "refused" && outcome.exit_code == kExitOk) outcome.exit_code = kExitValidation;
    solvers.push_back({{"label", s.label},
                       {"name", s.name},
                       {"status", s.status},
                       {"message", s.message},
                       {"initial_error", s.initial_error},
                       {"final_error", s.final_error},
                       {"seconds", s.seconds},
                       {"trace", s.trace_file.filename().string()},
                       {"a_final", s.a_final_file.empty() ? json(nullptr) : json(s.a_final_file.filename().string())}});
  }
  json summary = {{"config_hash", hex64(config_hash(cfg))}, {"build", build_id()}, {"solvers", solvers}};
  io::write_text(out / kSummaryFile, summary.dump(2) + "\n");
  return outcome;
}

ErrorReport cli_eval(const fs::path& estimate, const fs::path& truth, const fs::path& report_path) {
  const DenseMatrix a = io::load_matrix(estimate);
  const DenseMatrix a_star = io::load_matrix(truth);
  if (a.rows() != a_star.rows())
    throw ValidationError("estimate has " + std::to_string(a.rows()) + " rows but ground truth has " +
                          std::to_string(a_star.rows()));
  ErrorReport report = total_correlation_error(a, a_star);
  if (!report_path.empty()) io::write_text(report_path, io::to_json(report).dump(2) + "\n");
  return report;
}

json cli_gcc(const fs::path& weights, const fs::path& report_path, const std::vector<double>& alphas) {
  const DenseMatrix x = io::load_matrix(weights);
  const GccEstimate est = gcc_from_samples(x);
  const DecayProfile decay = decay_profile(x, alphas);

  GccParams params = est.params;
  params.q = decay.fitted_q;

  json moments = json::array();
  for (Index i = 0; i < est.second_moment.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < est.second_moment.cols(); ++j) row.push_back(est.second_moment(i, j));
    moments.push_back(row);
  }
  json rows = json::array();
  for (const auto& r : decay.rows) rows.push_back({{"alpha", r.alpha}, {"max_conditional_cdf", r.max_conditional_cdf}});

  json report = {{"samples", est.samples},
                 {"D", x.rows()},
                 {"params", gcc_json(params)},
                 {"min_eigenvalue", est.min_eigenvalue},
                 {"mean", std::vector<double>(est.mean.data(), est.mean.data() + est.mean.size())},
                 {"second_moment", moments},
                 {"decay",
                  {{"rows", rows},
                   {"fitted_q", number_or_tag(decay.fitted_q)},
                   {"skipped_coordinates", decay.skipped_coordinates}}}};
  if (!report_path.empty()) io::write_text(report_path, report.dump(2) + "\n");
  return report;
}

}  // namespace andnmf
