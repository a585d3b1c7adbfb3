#include "seismic_htm/signal_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

void SynthConfig::validate() const {
  if (!(p_jitter >= 0.0 && p_jitter <= 1.0)) throw ConfigError("synth.p_jitter", "must be in [0, 1]");
  if (n_sines == 0) throw ConfigError("synth.n_sines", "must be positive");
  if (!(f_min < f_max)) throw ConfigError("synth.f_min", "must be below synth.f_max");
  if (duration == 0) throw ConfigError("synth.duration", "must be positive");
  if (!(amp_min <= amp_max)) throw ConfigError("synth.amp_min", "must not exceed synth.amp_max");
  if (!(noise_min < noise_max)) throw ConfigError("synth.noise_min", "must be below synth.noise_max");
}

double JitterEvent::contribution(std::uint64_t t) const {
  const auto tau = static_cast<double>(t - onset);
  double sum = 0.0;
  for (auto f : frequencies) sum += amplitude * std::sin(2.0 * std::numbers::pi * f * tau);
  return sum;
}

SignalGenerator::SignalGenerator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.rng_seed) {
  cfg_.validate();
}

Sample SignalGenerator::next_sample() {
  std::erase_if(live_, [&](const JitterEvent& e) { return !e.active_at(t_); });

  Sample s;
  s.t = t_;
  s.value = rng_.uniform(cfg_.noise_min, cfg_.noise_max);
  if (rng_.uniform01() < cfg_.p_jitter) {
    JitterEvent e;
    e.onset = t_;
    e.duration = cfg_.duration;
    e.amplitude = rng_.uniform(cfg_.amp_min, cfg_.amp_max);
    e.frequencies.resize(cfg_.n_sines);
    for (auto& f : e.frequencies) f = rng_.uniform(cfg_.f_min, cfg_.f_max);
    live_.push_back(e);
    s.spawned = std::move(e);
  }
  for (const auto& e : live_) s.value += e.contribution(t_);
  s.jitter_active = !live_.empty();
  ++t_;
  return s;
}

void SignalGenerator::save(BinaryWriter& out) const {
  out.str(rng_.state());
  out.u64(t_);
  out.u64(live_.size());
  for (const auto& e : live_) {
    out.u64(e.onset);
    out.u32(e.duration);
    out.f64(e.amplitude);
    out.f64s(e.frequencies);
  }
}

SignalGenerator SignalGenerator::load(BinaryReader& in, const SynthConfig& cfg) {
  SignalGenerator g(cfg);
  g.rng_.set_state(in.str());
  g.t_ = in.u64();
  g.live_.resize(in.count(28));
  for (auto& e : g.live_) {
    e.onset = in.u64();
    e.duration = in.u32();
    e.amplitude = in.f64();
    e.frequencies = in.f64s();
    if (e.frequencies.size() != cfg.n_sines || e.onset > g.t_) {
      throw FormatError("generator event is corrupt");
    }
  }
  return g;
}

} // namespace seismic_htm
