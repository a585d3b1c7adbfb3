#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "seismic_htm/scalar_encoder.hpp"
#include "seismic_htm/sdr_classifier.hpp"
#include "seismic_htm/signal_synth.hpp"
#include "seismic_htm/spatial_pooler.hpp"
#include "seismic_htm/temporal_memory.hpp"

namespace seismic_htm {

struct RunConfig {
  std::uint64_t total_steps = 600000;
  std::uint32_t window_len = 1200;
  double threshold = 0.5;
  std::uint32_t lag = 5;

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Everything needed to reproduce a run: the four reference blocks plus the
/// generator and run settings.
struct HtmConfig {
  EncoderConfig sensor;
  SpConfig sp;
  TmConfig tp;
  ClassifierConfig classifier;
  SynthConfig synth;
  RunConfig run;

  /// Per-block validation, then cross-block width checks:
  /// sensor.n == sp.input_width, sp.column_count == tp.column_count,
  /// tp cell count == classifier.input_width,
  /// sensor bucket count == classifier.bucket_count.
  void validate() const;

  /// Canonical JSON text (sorted keys, fixed layout).
  std::string to_json() const;
  /// Parses and validates. Missing fields keep their defaults; unknown
  /// fields and wrong types are ConfigErrors naming the field.
  static HtmConfig from_json(const std::string& text);
  static HtmConfig load(const std::filesystem::path& path);

  /// FNV-1a 64 of to_json().
  std::uint64_t hash() const;

  friend bool operator==(const HtmConfig&, const HtmConfig&) = default;
};

std::string hex64(std::uint64_t v);

} // namespace seismic_htm
