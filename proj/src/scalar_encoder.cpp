#include "seismic_htm/scalar_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

void EncoderConfig::validate() const {
  if (w == 0 || w % 2 == 0) throw ConfigError("sensor.w", "must be odd and positive");
  if (w >= n) throw ConfigError("sensor.w", "must be smaller than sensor.n");
  if (!std::isfinite(min_val) || !std::isfinite(max_val)) {
    throw ConfigError("sensor.min", "bounds must be finite");
  }
  if (!(min_val < max_val)) throw ConfigError("sensor.min", "must be below sensor.max");
}

std::uint32_t bucket_index(double value, const EncoderConfig& cfg) {
  if (!std::isfinite(value)) {
    throw InputError("cannot encode non-finite value " + std::to_string(value));
  }
  if (cfg.clip) {
    value = std::clamp(value, cfg.min_val, cfg.max_val);
  } else if (value < cfg.min_val || value > cfg.max_val) {
    throw InputError("value " + std::to_string(value) + " outside encoder range");
  }
  const double span = static_cast<double>(cfg.n - cfg.w);
  const double scaled = (value - cfg.min_val) / (cfg.max_val - cfg.min_val) * span;
  const auto bucket = static_cast<std::uint32_t>(std::floor(scaled + 0.5));
  return std::min(bucket, cfg.n - cfg.w);
}

Sdr encode(double value, const EncoderConfig& cfg) {
  return Sdr::range(cfg.n, bucket_index(value, cfg), cfg.w);
}

double bucket_midpoint(std::uint32_t bucket, const EncoderConfig& cfg) {
  if (bucket > cfg.n - cfg.w) {
    throw ContractViolation("bucket " + std::to_string(bucket) + " out of range");
  }
  return cfg.min_val +
         static_cast<double>(bucket) * (cfg.max_val - cfg.min_val) / (cfg.n - cfg.w);
}

} // namespace seismic_htm
