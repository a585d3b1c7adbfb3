#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seismic_htm/binary_io.hpp"
#include "seismic_htm/random.hpp"

namespace seismic_htm {

/// Synthetic seismic stream: uniform instrumental noise plus sporadic
/// sine-burst jitters.
struct SynthConfig {
  double p_jitter = 0.005;
  std::uint32_t n_sines = 10;
  double f_min = 0.01;  ///< cycles per step
  double f_max = 0.1;
  std::uint32_t duration = 25;  ///< steps
  double amp_min = 0.0;
  double amp_max = 5.0;
  double noise_min = -1.0;
  double noise_max = 1.0;
  std::uint64_t rng_seed = 42;

  void validate() const;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct JitterEvent {
  std::uint64_t onset = 0;
  std::uint32_t duration = 0;
  double amplitude = 0.0;
  std::vector<double> frequencies;

  /// sum_n a * sin(2 pi f_n tau) with tau = t - onset.
  double contribution(std::uint64_t t) const;
  bool active_at(std::uint64_t t) const noexcept { return t >= onset && t - onset < duration; }

  friend bool operator==(const JitterEvent&, const JitterEvent&) = default;
};

struct Sample {
  std::uint64_t t = 0;
  double value = 0.0;
  bool jitter_active = false;
  std::optional<JitterEvent> spawned;  ///< event whose onset is this step
};

/// Per step: draw noise e in [noise_min, noise_max); with probability
/// p_jitter start a new event (amplitude and n_sines frequencies drawn
/// uniformly); emit e plus the contribution of every live event. Events last
/// `duration` steps and may overlap.
class SignalGenerator {
public:
  explicit SignalGenerator(const SynthConfig& cfg);

  const SynthConfig& config() const noexcept { return cfg_; }
  std::uint64_t step() const noexcept { return t_; }

  Sample next_sample();

  void save(BinaryWriter& out) const;
  static SignalGenerator load(BinaryReader& in, const SynthConfig& cfg);

  friend bool operator==(const SignalGenerator&, const SignalGenerator&) = default;

private:
  SynthConfig cfg_;
  Random rng_;
  std::uint64_t t_ = 0;
  std::vector<JitterEvent> live_;
};

} // namespace seismic_htm
