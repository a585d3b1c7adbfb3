// seismic-htm: run, analyze and checkpoint streaming HTM anomaly experiments
// on the synthetic seismic signal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "seismic_htm/config.hpp"
#include "seismic_htm/errors.hpp"
#include "seismic_htm/experiment.hpp"
#include "seismic_htm/step_log.hpp"

namespace fs = std::filesystem;
using namespace seismic_htm;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kIoError = 3, kAnalysisError = 4 };

struct SeedOverrides {
  std::optional<std::uint64_t> sp, tm, synth;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed-sp", sp, "Override sp.seed");
    cmd->add_option("--seed-tm", tm, "Override tp.seed");
    cmd->add_option("--seed-synth", synth, "Override synth.rng_seed");
  }

  bool any() const { return sp || tm || synth; }

  void apply(HtmConfig& cfg) const {
    if (sp) cfg.sp.seed = *sp;
    if (tm) cfg.tp.seed = *tm;
    if (synth) cfg.synth.rng_seed = *synth;
  }
};

HtmConfig load_config(const std::string& path, const SeedOverrides& seeds) {
  HtmConfig cfg = path.empty() ? HtmConfig{} : HtmConfig::load(path);
  seeds.apply(cfg);
  cfg.validate();
  return cfg;
}

int cmd_run(const std::string& config_path, const SeedOverrides& seeds,
            std::optional<std::uint64_t> steps, const std::string& out,
            std::uint64_t checkpoint_every, const std::string& resume, bool verbose) {
  const HtmConfig cfg = load_config(config_path, seeds);
  Experiment exp = resume.empty() ? Experiment(cfg) : Experiment::load_checkpoint(resume, &cfg);

  RunOptions opts;
  opts.steps = steps.value_or(cfg.run.total_steps);
  opts.out_dir = out;
  opts.checkpoint_every = checkpoint_every;
  if (verbose) {
    opts.on_window = [](const WindowStats& w) {
      std::fprintf(stderr, "window %llu rms=%.4f mae=%.4f anomaly=%.4f\n",
                   static_cast<unsigned long long>(w.window_index), w.rms_error,
                   w.mean_abs_error, w.mean_anomaly);
    };
  }
  const auto summary = run_experiment(exp, opts);
  std::cout << "steps " << summary.steps << ", windows " << summary.windows << ", config "
            << hex64(cfg.hash()) << ", output " << out << '\n';
  return kOk;
}

int cmd_analyze(const std::string& log_path, const AnalysisOptions& opts, const std::string& out) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw FormatError("cannot open step log " + log_path);
  std::vector<StepRecord> records;
  try {
    records = read_step_log(in);
  } catch (const FormatError& e) {
    std::cerr << "analyze: " << e.what() << '\n';
    return kAnalysisError;
  }
  const auto a = analyze(records, opts);
  const fs::path out_dir = out.empty() ? fs::path(log_path).parent_path() / "analysis" : fs::path(out);
  write_analysis(a, records, opts, out_dir);

  const auto show = [](const std::optional<std::uint64_t>& w) {
    return w ? std::to_string(*w) : std::string("none");
  };
  std::cout << "events " << a.detection.events.size() << ", detected " << a.detection.detected
            << ", missed " << a.detection.missed << ", false positives "
            << a.detection.false_positive_steps.size() << " ("
            << format_real(a.detection.false_positives_per_10k) << " per 10k noise steps)\n"
            << "windows " << a.windows.size() << ", 50% drop at window "
            << show(a.curve.half_drop_window) << ", adapted from window "
            << show(a.curve.adaptation_window) << '\n'
            << "report written to " << out_dir.string() << '\n';
  return kOk;
}

int cmd_checkpoint_test(const std::string& path, const std::string& config_path,
                        const SeedOverrides& seeds, std::uint64_t steps) {
  std::optional<HtmConfig> expected;
  if (!config_path.empty() || seeds.any()) expected = load_config(config_path, seeds);
  Experiment resumed = Experiment::load_checkpoint(path, expected ? &*expected : nullptr);
  const auto start = resumed.steps_done();

  Experiment reference(resumed.config());
  while (reference.steps_done() < start) reference.advance();
  if (!(reference == resumed)) {
    std::cout << "checkpoint state differs from an uninterrupted run at step " << start << '\n';
    return kAnalysisError;
  }
  for (std::uint64_t i = 0; i < steps; ++i) {
    const auto a = resumed.advance();
    const auto b = reference.advance();
    if (!(a.record == b.record)) {
      std::cout << "mismatch at step " << a.record.t << '\n';
      return kAnalysisError;
    }
  }
  if (!(reference == resumed)) {
    std::cout << "model state diverged after " << steps << " steps\n";
    return kAnalysisError;
  }
  std::cout << "checkpoint at step " << start << " resumed bit-exactly for " << steps
            << " steps\n";
  return kOk;
}

int cmd_gen(const std::string& config_path, const SeedOverrides& seeds,
            std::optional<std::uint64_t> steps, const std::string& out) {
  const HtmConfig cfg = load_config(config_path, seeds);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty() && out != "-") {
    file.open(out, std::ios::binary | std::ios::trunc);
    if (!file) throw FormatError("cannot write " + out);
    os = &file;
  }
  SignalGenerator gen(cfg.synth);
  write_signal_header(*os);
  const auto n = steps.value_or(cfg.run.total_steps);
  for (std::uint64_t i = 0; i < n; ++i) write_signal_row(*os, gen.next_sample());
  os->flush();
  if (!*os) throw FormatError("write failed for " + out);
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming HTM anomaly detection on synthetic seismic signals"};
  app.require_subcommand(1);

  std::string config_path, out, resume, log_path, ckpt_path;
  SeedOverrides seeds;
  std::optional<std::uint64_t> steps;
  std::uint64_t checkpoint_every = 0;
  std::uint64_t test_steps = 1000;
  bool verbose = false;
  AnalysisOptions analysis;

  auto* run = app.add_subcommand("run", "Run the detector on the generated stream");
  run->add_option("--config", config_path, "JSON config (defaults to the built-in reference set)");
  seeds.add_to(run);
  run->add_option("--steps", steps, "Steps to run (default run.total_steps)");
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--checkpoint-every", checkpoint_every, "Write a checkpoint every N steps");
  run->add_option("--resume", resume, "Continue from a checkpoint");
  run->add_flag("-v,--verbose", verbose, "Print window statistics as they complete");

  auto* an = app.add_subcommand("analyze", "Detection report and learning curve for a step log");
  an->add_option("steplog", log_path, "steps.csv written by run")->required();
  an->add_option("--threshold", analysis.threshold, "Anomaly threshold for detections");
  an->add_option("--lag", analysis.lag, "Steps after an event still credited to it");
  an->add_option("--window", analysis.window_len, "Window length in steps");
  an->add_option("--event-duration", analysis.event_duration, "Jitter duration in steps");
  an->add_option("--out", out, "Output directory (default: <log dir>/analysis)");

  auto* ck = app.add_subcommand("checkpoint-test", "Resume a checkpoint and compare with a fresh run");
  ck->add_option("checkpoint", ckpt_path, "Checkpoint file")->required();
  ck->add_option("--config", config_path, "Refuse checkpoints written under a different config");
  seeds.add_to(ck);
  ck->add_option("--steps", test_steps, "Steps to compare after resuming");

  auto* gen = app.add_subcommand("gen", "Export the synthetic signal as CSV");
  gen->add_option("--config", config_path, "JSON config");
  seeds.add_to(gen);
  gen->add_option("--steps", steps, "Samples to generate (default run.total_steps)");
  gen->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, seeds, steps, out, checkpoint_every, resume, verbose);
    if (*an) {
      if (!(analysis.threshold > 0.0 && analysis.threshold <= 1.0) || analysis.window_len == 0) {
        std::cerr << "analyze: threshold must be in (0, 1] and window positive\n";
        return kConfigError;
      }
      return cmd_analyze(log_path, analysis, out);
    }
    if (*ck) return cmd_checkpoint_test(ckpt_path, config_path, seeds, test_steps);
    if (*gen) return cmd_gen(config_path, seeds, steps, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FormatError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAnalysisError;
  }
  return kOk;
}
