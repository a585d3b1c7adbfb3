#include <gtest/gtest.h>

#include <cmath>
#include <deque>

#include "seismic_htm/errors.hpp"
#include "seismic_htm/signal_synth.hpp"

using namespace seismic_htm;

TEST(SignalSynth, PureNoiseStaysInBand) {
  SynthConfig cfg;
  cfg.p_jitter = 0.0;
  SignalGenerator gen(cfg);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const auto s = gen.next_sample();
    ASSERT_GE(s.value, -1.0);
    ASSERT_LE(s.value, 1.0);
    ASSERT_FALSE(s.jitter_active);
    sum += s.value;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
}

// One event contributes at most 10 sines x amplitude 5; events may overlap, so
// the bound is 1 + 50 per live event.
TEST(SignalSynth, OnsetRateAndAmplitudeBound) {
  SignalGenerator gen(SynthConfig{});
  int onsets = 0;
  std::deque<std::uint64_t> live;
  bool single_event_bound_exceeded = false;
  for (int i = 0; i < 1'000'000; ++i) {
    const auto s = gen.next_sample();
    while (!live.empty() && s.t - live.front() >= 25) live.pop_front();
    if (s.spawned) {
      ++onsets;
      live.push_back(s.t);
      EXPECT_EQ(s.spawned->onset, s.t);
      EXPECT_EQ(s.spawned->frequencies.size(), 10u);
      EXPECT_GE(s.spawned->amplitude, 0.0);
      EXPECT_LE(s.spawned->amplitude, 5.0);
      EXPECT_TRUE(s.jitter_active);
    }
    ASSERT_LE(std::abs(s.value), 1.0 + 50.0 * static_cast<double>(live.size())) << s.t;
    if (live.size() <= 1) ASSERT_LE(std::abs(s.value), 51.0);
    single_event_bound_exceeded = single_event_bound_exceeded || std::abs(s.value) > 51.0;
  }
  EXPECT_NEAR(onsets, 5000, 350);
  // Overlaps do occur at p = 0.005, so the single-event bound is not global.
  EXPECT_TRUE(single_event_bound_exceeded);
}

TEST(SignalSynth, EventGeometry) {
  JitterEvent ev{100, 25, 3.0, {0.01, 0.05, 0.1}};
  EXPECT_EQ(ev.contribution(100), 0.0);
  EXPECT_FALSE(ev.active_at(99));
  EXPECT_TRUE(ev.active_at(100));
  EXPECT_TRUE(ev.active_at(124));
  EXPECT_FALSE(ev.active_at(125));
  const double pi = std::acos(-1.0);
  double expected = 0.0;
  for (double f : ev.frequencies) expected += 3.0 * std::sin(2.0 * pi * f * 7.0);
  EXPECT_NEAR(ev.contribution(107), expected, 1e-12);
}

TEST(SignalSynth, JitterFlagCoversExactlyTheEventWindow) {
  SignalGenerator gen(SynthConfig{});
  std::vector<std::uint64_t> onsets;
  std::vector<bool> flags;
  for (int i = 0; i < 50000; ++i) {
    const auto s = gen.next_sample();
    if (s.spawned) onsets.push_back(s.t);
    flags.push_back(s.jitter_active);
  }
  for (std::uint64_t t = 0; t < flags.size(); ++t) {
    bool expected = false;
    for (auto o : onsets) expected = expected || (t >= o && t < o + 25);
    ASSERT_EQ(flags[t], expected) << t;
  }
}

TEST(SignalSynth, DeterministicUnderSeed) {
  SignalGenerator a(SynthConfig{}), b(SynthConfig{});
  SynthConfig other;
  other.rng_seed = 43;
  SignalGenerator c(other);
  bool differs = false;
  for (int i = 0; i < 20000; ++i) {
    const auto sa = a.next_sample(), sb = b.next_sample(), sc = c.next_sample();
    ASSERT_EQ(sa.value, sb.value);
    ASSERT_EQ(sa.jitter_active, sb.jitter_active);
    differs = differs || sa.value != sc.value;
  }
  EXPECT_TRUE(differs);
}

TEST(SignalSynth, SaveLoadResumesStream) {
  SignalGenerator gen(SynthConfig{});
  for (int i = 0; i < 1234; ++i) gen.next_sample();
  BinaryWriter w;
  gen.save(w);
  BinaryReader r(w.bytes().data(), w.bytes().size());
  auto resumed = SignalGenerator::load(r, SynthConfig{});
  EXPECT_TRUE(resumed == gen);
  for (int i = 0; i < 5000; ++i) ASSERT_EQ(gen.next_sample().value, resumed.next_sample().value);
}

TEST(SignalSynth, ConfigValidation) {
  SynthConfig bad;
  bad.p_jitter = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = SynthConfig{};
  bad.f_min = 0.2;
  EXPECT_THROW(bad.validate(), ConfigError);
}
