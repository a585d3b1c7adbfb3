#pragma once

#include <cstdint>

#include "seismic_htm/sdr.hpp"

namespace seismic_htm {

/// Sensor parameters. Defaults are the reference sensor block.
struct EncoderConfig {
  std::uint32_t n = 118;  ///< total bits
  std::uint32_t w = 21;   ///< active bits, odd
  double min_val = -2.0;
  double max_val = 2.0;
  bool clip = true;

  /// n - w + 1 bucket positions for the active window.
  std::uint32_t bucket_count() const noexcept { return n - w + 1; }

  /// Throws ConfigError naming the first bad field.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Index of the first active bit for `value`:
///   floor((clamp(value) - min) / (max - min) * (n - w) + 0.5)
/// Non-finite values throw InputError. Without clipping, out-of-range values
/// are rejected as well.
std::uint32_t bucket_index(double value, const EncoderConfig& cfg);

/// w consecutive bits starting at bucket_index(value).
Sdr encode(double value, const EncoderConfig& cfg);

/// Value at the centre of a bucket: min + bucket * (max - min) / (n - w).
double bucket_midpoint(std::uint32_t bucket, const EncoderConfig& cfg);

} // namespace seismic_htm
