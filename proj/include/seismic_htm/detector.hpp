#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seismic_htm/config.hpp"

namespace seismic_htm {

struct StepRecord {
  std::uint64_t t = 0;
  double value = 0.0;
  /// Prediction made at t - 1 for this step; absent on the first step.
  std::optional<double> predicted_value;
  double anomaly_score = 0.0;
  bool jitter_active = false;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct WindowStats {
  std::uint64_t window_index = 0;  ///< 1-based: window 1 covers steps [0, window_len)
  std::uint32_t window_len = 0;
  double rms_error = 0.0;
  double mean_abs_error = 0.0;
  double mean_anomaly = 0.0;
};

/// 1 - |hit| / |active|, or 0 when nothing is active. Throws
/// ContractViolation when `predicted_columns_hit` is not a subset of
/// `active_columns`.
double raw_anomaly(const Sdr& active_columns, const Sdr& predicted_columns_hit);

/// Streaming model: encoder -> spatial pooler -> temporal memory ->
/// classifier, learning on every step.
class DetectorModel {
public:
  explicit DetectorModel(const HtmConfig& cfg);

  StepRecord step(double value, bool jitter_active);

  std::uint64_t steps_seen() const noexcept { return t_; }
  const SpatialPooler& spatial_pooler() const noexcept { return sp_; }
  const TemporalMemory& temporal_memory() const noexcept { return tm_; }
  const SdrClassifier& classifier() const noexcept { return classifier_; }
  /// Prediction for the next step, if one has been made.
  std::optional<double> pending_prediction() const noexcept { return pending_; }

  void save(BinaryWriter& out) const;
  static DetectorModel load(BinaryReader& in, const HtmConfig& cfg);

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;

private:
  EncoderConfig encoder_;
  SpatialPooler sp_;
  TemporalMemory tm_;
  SdrClassifier classifier_;
  std::optional<double> pending_;
  std::uint64_t t_ = 0;
};

/// Consecutive non-overlapping windows; a trailing partial window is
/// dropped. Steps without a prediction are left out of the error terms.
std::vector<WindowStats> window_stats(std::span<const StepRecord> records,
                                      std::uint32_t window_len);

struct EventOutcome {
  std::uint64_t start = 0;  ///< first jitter step
  std::uint64_t end = 0;    ///< last jitter step
  bool detected = false;
  std::optional<std::uint64_t> first_hit;
  double peak_anomaly = 0.0;  ///< max score in [start, end + lag]
};

struct DetectionReport {
  std::vector<EventOutcome> events;
  std::size_t detected = 0;
  std::size_t missed = 0;
  std::vector<std::uint64_t> false_positive_steps;
  std::uint64_t noise_steps = 0;
  double false_positives_per_10k = 0.0;

  double detection_rate() const noexcept {
    return events.empty() ? 0.0 : static_cast<double>(detected) / events.size();
  }
};

/// Ground-truth events are maximal runs of jitter_active. An event counts as
/// detected when some score >= threshold falls in [start, end + lag]. A
/// spike is the first step of a run of scores >= threshold; it is a false
/// positive when no jitter step lies in the preceding event_duration + lag
/// steps (inclusive of the spike step). The rate is per 10 000 steps with no
/// jitter.
DetectionReport detect_events(std::span<const StepRecord> records, double threshold,
                              std::uint32_t lag, std::uint32_t event_duration = 25);

} // namespace seismic_htm
