#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seismic_htm/config.hpp"
#include "seismic_htm/detector.hpp"
#include "seismic_htm/signal_synth.hpp"

namespace seismic_htm {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'S', 'H', 'T', 'M', 'C', 'K', 'P', 'T'};
inline constexpr const char* kToolVersion = "1.0.0";

/// A configured generator feeding a detector model.
class Experiment {
public:
  explicit Experiment(const HtmConfig& cfg);

  struct Step {
    Sample sample;
    StepRecord record;
  };

  Step advance();

  const HtmConfig& config() const noexcept { return cfg_; }
  const DetectorModel& model() const noexcept { return model_; }
  const SignalGenerator& generator() const noexcept { return gen_; }
  std::uint64_t steps_done() const noexcept { return model_.steps_seen(); }

  /// Checkpoint layout (all integers little-endian):
  ///   8 bytes magic "SHTMCKPT"
  ///   u32 format version
  ///   u64 config hash, then the config JSON as u64 length + bytes
  ///   model state (step counter, pending prediction, sp, tm, classifier)
  ///   generator state
  ///   u64 FNV-1a of every preceding byte
  std::vector<std::uint8_t> checkpoint_bytes() const;
  void save_checkpoint(const std::filesystem::path& path) const;

  /// Rebuilds an experiment. Throws FormatError on corruption or a version
  /// mismatch (message carries both versions), and ConfigError when
  /// `expected` is given and its hash differs from the checkpoint's.
  static Experiment from_checkpoint(std::span<const std::uint8_t> bytes,
                                    const HtmConfig* expected = nullptr);
  static Experiment load_checkpoint(const std::filesystem::path& path,
                                    const HtmConfig* expected = nullptr);

  friend bool operator==(const Experiment&, const Experiment&) = default;

private:
  Experiment(HtmConfig cfg, SignalGenerator gen, DetectorModel model);

  HtmConfig cfg_;
  SignalGenerator gen_;
  DetectorModel model_;
};

struct RunOptions {
  std::uint64_t steps = 0;
  std::filesystem::path out_dir;
  std::uint64_t checkpoint_every = 0;  ///< 0 disables periodic checkpoints
  std::function<void(const WindowStats&)> on_window;  ///< called as each window completes
};

struct RunSummary {
  std::uint64_t steps = 0;
  std::size_t windows = 0;
  std::vector<std::filesystem::path> checkpoints;
};

/// Runs `opts.steps` more steps, writing steps.csv, windows.csv, events.csv
/// and manifest.json into opts.out_dir. Throws FormatError on I/O failure.
RunSummary run_experiment(Experiment& exp, const RunOptions& opts);

struct LearningCurve {
  std::optional<std::uint64_t> half_drop_window;  ///< first window <= 0.5 x window 1
  std::optional<std::uint64_t> adaptation_window;  ///< start of the final run of windows < limit
  double first_window_anomaly = 0.0;
};

LearningCurve learning_curve(std::span<const WindowStats> windows, double adapted_limit = 0.05);

struct AnalysisOptions {
  double threshold = 0.5;
  std::uint32_t lag = 5;
  std::uint32_t window_len = 1200;
  std::uint32_t event_duration = 25;
};

struct Analysis {
  DetectionReport detection;
  std::vector<WindowStats> windows;
  LearningCurve curve;
};

Analysis analyze(std::span<const StepRecord> records, const AnalysisOptions& opts);

/// Writes report.json plus plot-ready columnar files fig1_cold_start.csv,
/// fig2_adapted.csv, fig3_prediction.csv and fig4_learning_curve.csv.
void write_analysis(const Analysis& a, std::span<const StepRecord> records,
                    const AnalysisOptions& opts, const std::filesystem::path& out_dir);

} // namespace seismic_htm
