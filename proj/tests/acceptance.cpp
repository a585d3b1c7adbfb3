// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
// Usage: acceptance [criterion numbers...]   (default: all nine)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seismic_htm/experiment.hpp"
#include "seismic_htm/scalar_encoder.hpp"
#include "seismic_htm/sdr_classifier.hpp"
#include "seismic_htm/signal_synth.hpp"
#include "seismic_htm/spatial_pooler.hpp"
#include "seismic_htm/step_log.hpp"
#include "seismic_htm/temporal_memory.hpp"

using namespace seismic_htm;

namespace {

// Tolerances and budgets.
constexpr double kDropFactor = 0.6;             // window 10 <= factor x window 1
constexpr double kPrefixBudgetSeconds = 60.0;   // 12 000-step prefix
constexpr std::uint64_t kAdaptSteps = 400'000;  // noise-only run length
constexpr double kAdaptBudgetSeconds = 900.0;
constexpr std::uint64_t kLastAdaptWindow = 250;
constexpr double kAdaptedLimit = 0.05;
constexpr std::uint64_t kDetectSteps = 100'000;
constexpr double kMinAmplitude = 1.0;
constexpr double kDetectThreshold = 0.5;
constexpr std::uint32_t kDetectLag = 5;
constexpr double kMinDetectionRate = 0.8;
constexpr double kMaxFalsePer10k = 5.0;
constexpr double kColdStartFloor = 0.3;
constexpr int kSpCases = 1000;
constexpr int kTmMaxCycles = 200;
constexpr std::uint64_t kFuzzSteps = 1'000'000;
constexpr int kEncoderFuzz = 100'000;
constexpr std::uint64_t kPermanenceSteps = 100'000;
constexpr double kDistributionTolerance = 1e-9;
constexpr std::uint64_t kDeterminismSteps = 50'000;
constexpr int kGeneratorSamples = 1'000'000;
constexpr double kNoiseMeanTolerance = 0.01;
constexpr double kOnsetExpected = 5000.0;
constexpr double kOnsetTolerance = 350.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

void progress(const std::string& what) {
  std::fprintf(stderr, "  .. %s\n", what.c_str());
}

// ---- 1 and 4: learning-curve drop and cold start on the mixed stream ----

struct PrefixRun {
  std::vector<WindowStats> windows;
  double seconds = 0.0;
};

const PrefixRun& prefix_run() {
  static const PrefixRun run = [] {
    PrefixRun r;
    Experiment exp{HtmConfig{}};
    std::vector<StepRecord> records;
    Stopwatch clock;
    for (int i = 0; i < 12'000; ++i) records.push_back(exp.advance().record);
    r.seconds = clock.seconds();
    r.windows = window_stats(records, 1200);
    return r;
  }();
  return run;
}

Outcome criterion_1() {
  const auto& r = prefix_run();
  const double w1 = r.windows.at(0).mean_anomaly;
  const double w10 = r.windows.at(9).mean_anomaly;
  const bool pass = w10 <= kDropFactor * w1 && r.seconds < kPrefixBudgetSeconds;
  return {pass, fmt("window1=%.4f window10=%.4f ratio=%.3f (<= %.2f), ", w1, w10, w10 / w1, kDropFactor) +
                    fmt("12000 steps in %.1fs (< 60s)", r.seconds)};
}

Outcome criterion_4() {
  const double w1 = prefix_run().windows.at(0).mean_anomaly;
  return {w1 > kColdStartFloor, fmt("first-window mean anomaly %.4f (> %.2f)", w1, kColdStartFloor)};
}

// ---- 2 and 3: adaptation on noise, then detection on the mixed stream ----

struct AdaptRun {
  std::vector<WindowStats> windows;
  double seconds = 0.0;
  std::vector<std::uint8_t> checkpoint;
};

const AdaptRun& adapt_run() {
  static const AdaptRun run = [] {
    AdaptRun r;
    HtmConfig cfg;
    cfg.synth.p_jitter = 0.0;
    Experiment exp(cfg);
    std::vector<StepRecord> window;
    Stopwatch clock;
    for (std::uint64_t i = 0; i < kAdaptSteps; ++i) {
      window.push_back(exp.advance().record);
      if (window.size() == cfg.run.window_len) {
        auto w = window_stats(window, cfg.run.window_len).front();
        w.window_index = r.windows.size() + 1;
        r.windows.push_back(w);
        window.clear();
        if (w.window_index % 25 == 0) {
          progress(fmt("noise window %.0f mean anomaly %.4f, %.0fs", static_cast<double>(w.window_index),
                       w.mean_anomaly, clock.seconds()));
        }
      }
    }
    r.seconds = clock.seconds();
    r.checkpoint = exp.checkpoint_bytes();
    return r;
  }();
  return run;
}

Outcome criterion_2() {
  const auto& r = adapt_run();
  const auto curve = learning_curve(r.windows, kAdaptedLimit);
  double worst_after = 0.0;
  if (curve.adaptation_window) {
    for (const auto& w : r.windows) {
      if (w.window_index >= *curve.adaptation_window) worst_after = std::max(worst_after, w.mean_anomaly);
    }
  }
  double max_late = 0.0;
  for (const auto& w : r.windows) {
    if (w.window_index > kLastAdaptWindow) max_late = std::max(max_late, w.mean_anomaly);
  }
  const bool adapted = curve.adaptation_window && *curve.adaptation_window <= kLastAdaptWindow;
  const bool pass = adapted && r.seconds < kAdaptBudgetSeconds;
  std::string where = curve.adaptation_window
                          ? fmt("every window from %.0f on below %.2f (max %.4f)",
                                static_cast<double>(*curve.adaptation_window), kAdaptedLimit, worst_after)
                          : fmt("no final run of windows below %.2f (max after window 250: %.4f)",
                                kAdaptedLimit, max_late);
  return {pass, where + fmt(", %.0f windows, %.0fs for 400k steps (< 900s)",
                             static_cast<double>(r.windows.size()), r.seconds)};
}

Outcome criterion_3() {
  const auto& adapted = adapt_run();
  auto noise_model = Experiment::from_checkpoint(adapted.checkpoint);
  // The adapted model continues on a fresh mixed stream (new seed, p = 0.005).
  HtmConfig mixed = noise_model.config();
  mixed.synth.p_jitter = 0.005;
  mixed.synth.rng_seed = noise_model.config().synth.rng_seed + 1;
  DetectorModel model = noise_model.model();
  SignalGenerator gen(mixed.synth);

  std::vector<StepRecord> records;
  std::vector<JitterEvent> events;
  records.reserve(kDetectSteps);
  for (std::uint64_t i = 0; i < kDetectSteps; ++i) {
    const auto s = gen.next_sample();
    if (s.spawned) events.push_back(*s.spawned);
    auto rec = model.step(s.value, s.jitter_active);
    rec.t = s.t;
    records.push_back(rec);
  }

  // Each spawned event with amplitude >= 1 is judged on its own span + lag.
  std::size_t eligible = 0, hit = 0;
  for (const auto& ev : events) {
    if (ev.amplitude < kMinAmplitude) continue;
    ++eligible;
    const std::uint64_t last = std::min<std::uint64_t>(kDetectSteps - 1, ev.onset + ev.duration - 1 + kDetectLag);
    for (std::uint64_t t = ev.onset; t <= last; ++t) {
      if (records[t].anomaly_score >= kDetectThreshold) {
        ++hit;
        break;
      }
    }
  }
  const auto report = detect_events(records, kDetectThreshold, kDetectLag, mixed.synth.duration);
  const double rate = eligible ? static_cast<double>(hit) / eligible : 0.0;
  const bool pass = eligible > 0 && rate >= kMinDetectionRate &&
                    report.false_positives_per_10k < kMaxFalsePer10k;
  return {pass, fmt("%.0f/%.0f events with a >= 1 detected (%.3f >= 0.8), ", static_cast<double>(hit),
                    static_cast<double>(eligible), rate) +
                    fmt("%.0f false-positive spikes = %.2f per 10k noise steps (< 5)",
                        static_cast<double>(report.false_positive_steps.size()),
                        report.false_positives_per_10k)};
}

// ---- 5: spatial pooler against brute force ----

std::vector<std::uint32_t> brute_force_winners(const SpatialPooler& sp, const Sdr& input) {
  const auto& cfg = sp.config();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranked;
  for (std::uint32_t c = 0; c < cfg.column_count; ++c) {
    const auto pool = sp.potential_pool(c);
    const auto perm = sp.permanences(c);
    std::uint32_t n = 0;
    for (std::size_t s = 0; s < pool.size(); ++s) {
      // 1e-9 absorbs float drift from repeated +inc/-dec steps.
      if (input.contains(pool[s]) && perm[s] >= cfg.syn_perm_connected - 1e-9) ++n;
    }
    ranked.emplace_back(n, c);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::uint32_t> out;
  for (const auto& [n, c] : ranked) {
    if (out.size() == cfg.num_active_columns || n == 0) break;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome criterion_5() {
  std::mt19937_64 rng(5);
  int mismatches = 0;
  std::uint64_t compared = 0;
  for (int trial = 0; trial < kSpCases; ++trial) {
    SpConfig cfg;
    cfg.column_count = 2 + static_cast<std::uint32_t>(rng() % 15);
    cfg.input_width = 1 + static_cast<std::uint32_t>(rng() % 12);
    cfg.num_active_columns = 1 + static_cast<std::uint32_t>(rng() % (cfg.column_count - 1));
    cfg.potential_pct = 0.3 + 0.7 * static_cast<double>(rng() % 1000) / 999.0;
    if (cfg.potential_pool_size() == 0) cfg.potential_pct = 1.0;
    cfg.seed = rng();
    SpatialPooler sp(cfg);
    for (int step = 0; step < 10; ++step) {
      std::vector<Sdr::Index> bits;
      for (Sdr::Index b = 0; b < cfg.input_width; ++b) {
        if (rng() % 2) bits.push_back(b);
      }
      const Sdr input(cfg.input_width, bits);
      const auto expected = brute_force_winners(sp, input);
      const auto got = sp.compute(input, step % 3 != 2);
      ++compared;
      if (!std::equal(got.active().begin(), got.active().end(), expected.begin(), expected.end())) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt("%.0f random instances, %.0f winner sets compared, %.0f mismatches",
                               kSpCases, static_cast<double>(compared), mismatches)};
}

// ---- 6: temporal memory on a 3-pattern cycle ----

Outcome criterion_6() {
  TmConfig cfg;
  cfg.column_count = 64;
  cfg.cells_per_column = 4;
  TemporalMemory tm(cfg);
  std::mt19937_64 rng(6);
  std::vector<Sdr> patterns;
  for (int p = 0; p < 3; ++p) {
    std::vector<Sdr::Index> cols(64);
    for (Sdr::Index c = 0; c < 64; ++c) cols[c] = c;
    std::shuffle(cols.begin(), cols.end(), rng);
    cols.resize(20);
    patterns.emplace_back(64, cols);
  }

  // First step: nothing learned, so every active column bursts.
  const auto first = tm.compute(patterns[0], true);
  std::vector<Sdr::Index> expected_cells;
  for (auto c : patterns[0].active()) {
    for (Sdr::Index i = 0; i < 4; ++i) expected_cells.push_back(c * 4 + i);
  }
  const bool burst_ok = first.active_cells == Sdr(256, expected_cells) &&
                        raw_anomaly(patterns[0], first.predicted_columns_hit) == 1.0;

  std::optional<int> converged;
  for (int cycle = 1; cycle <= kTmMaxCycles && !converged; ++cycle) {
    bool clean = true;
    for (std::size_t p = cycle == 1 ? 1 : 0; p < 3; ++p) {
      const auto out = tm.compute(patterns[p], true);
      clean = clean && raw_anomaly(patterns[p], out.predicted_columns_hit) == 0.0;
    }
    if (clean && cycle > 1) converged = cycle;
  }
  const bool pass = burst_ok && converged.has_value();
  return {pass, std::string("first step ") + (burst_ok ? "bursts every column with anomaly 1.0" : "DID NOT burst") +
                    (converged ? fmt(", anomaly 0 over a full cycle at cycle %.0f (<= 200)", *converged)
                               : std::string(", no zero-anomaly cycle within 200"))};
}

// ---- 7: invariants under fuzzing ----

// A reduced pipeline (same code paths, smaller sheet) so 10^6 steps stay fast.
HtmConfig fuzz_config() {
  HtmConfig cfg;
  cfg.sp.column_count = 256;
  cfg.sp.num_active_columns = 10;
  cfg.tp.column_count = 256;
  cfg.tp.cells_per_column = 8;
  cfg.tp.activation_threshold = 6;
  cfg.tp.min_threshold = 4;
  cfg.tp.new_synapse_count = 8;
  cfg.tp.max_synapses_per_segment = 16;
  cfg.tp.max_segments_per_cell = 16;
  cfg.tp.predicted_segment_decrement = 0.05;
  cfg.classifier.input_width = 256 * 8;
  return cfg;
}

Outcome criterion_7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  std::uniform_real_distribution<double> near(-3.0, 3.0);

  // Anomaly range over 10^6 fuzzed steps; permanences checked at 10^5.
  DetectorModel model(fuzz_config());
  double lo = 1.0, hi = 0.0;
  bool perms_ok = true;
  std::string perm_note;
  for (std::uint64_t i = 0; i < kFuzzSteps; ++i) {
    double v;
    switch (rng() % 4) {
      case 0: v = near(rng); break;
      case 1: v = wide(rng); break;
      default: v = std::sin(0.3 * static_cast<double>(i)) * 1.5; break;  // learnable part
    }
    const auto r = model.step(v, false);
    lo = std::min(lo, r.anomaly_score);
    hi = std::max(hi, r.anomaly_score);
    if (i + 1 == kPermanenceSteps) {
      const auto [tlo, thi] = model.temporal_memory().permanence_range();
      double slo = 1.0, shi = 0.0;
      const auto& sp = model.spatial_pooler();
      for (std::uint32_t c = 0; c < sp.config().column_count; ++c) {
        for (double p : sp.permanences(c)) {
          slo = std::min(slo, p);
          shi = std::max(shi, p);
        }
      }
      perms_ok = tlo >= 0.0 && thi <= 1.0 && slo >= 0.0 && shi <= 1.0 &&
                 model.temporal_memory().num_synapses() > 0;
      perm_note = fmt("tm perms [%.3f, %.3f], sp perms [%.3f, %.3f]", tlo, thi, slo, shi);
    }
  }
  const bool anomaly_ok = lo >= 0.0 && hi <= 1.0;

  const EncoderConfig enc;
  int bad_widths = 0;
  std::uniform_real_distribution<double> extreme(-1e300, 1e300);
  for (int i = 0; i < kEncoderFuzz; ++i) {
    const double v = i % 2 ? near(rng) : (i % 4 == 0 ? extreme(rng) : wide(rng));
    if (encode(v, enc).size() != enc.w) ++bad_widths;
  }

  ClassifierConfig ccfg;
  ccfg.input_width = 4096;
  std::vector<double> fallback(ccfg.bucket_count);
  for (std::uint32_t b = 0; b < ccfg.bucket_count; ++b) fallback[b] = bucket_midpoint(b, enc);
  ccfg.alpha = 0.5;  // aggressive rate to push scores far apart
  SdrClassifier cls(ccfg, fallback);
  double worst_sum = 0.0;
  bool nonnegative = true;
  for (int i = 0; i < 20'000; ++i) {
    std::vector<Sdr::Index> bits;
    const auto n = rng() % 60;
    std::set<Sdr::Index> chosen;
    while (chosen.size() < n) chosen.insert(static_cast<Sdr::Index>(rng() % 4096));
    bits.assign(chosen.begin(), chosen.end());
    const auto r = cls.classify(Sdr(4096, bits), static_cast<std::uint32_t>(rng() % 98), 0.0, true, true);
    double sum = 0.0;
    for (double p : r->distribution) {
      nonnegative = nonnegative && p >= 0.0;
      sum += p;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  const bool dist_ok = nonnegative && worst_sum <= kDistributionTolerance;

  const bool pass = anomaly_ok && bad_widths == 0 && perms_ok && dist_ok;
  return {pass, fmt("anomaly range [%.3f, %.3f] over 1e6 steps; ", lo, hi) +
                    fmt("%.0f/100000 encodings not 21 bits; ", bad_widths) + perm_note +
                    fmt(" after 1e5 steps; max |sum-1| %.2e", worst_sum)};
}

// ---- 8: determinism and checkpoint resume ----

Outcome criterion_8() {
  const HtmConfig cfg;
  const std::uint64_t split = kDeterminismSteps / 2;
  std::ostringstream log_a, log_b, log_resumed;
  std::vector<std::uint8_t> checkpoint;
  Experiment a(cfg);
  {
    StepLogWriter w(log_a);
    for (std::uint64_t i = 0; i < kDeterminismSteps; ++i) {
      if (i == split) checkpoint = a.checkpoint_bytes();
      w.write(a.advance().record);
    }
  }
  {
    Experiment b(cfg);
    StepLogWriter w(log_b);
    for (std::uint64_t i = 0; i < kDeterminismSteps; ++i) w.write(b.advance().record);
  }
  auto resumed = Experiment::from_checkpoint(checkpoint, &cfg);
  {
    StepLogWriter w(log_resumed);
    while (resumed.steps_done() < kDeterminismSteps) w.write(resumed.advance().record);
  }
  const auto text_a = log_a.str();
  const bool identical = text_a == log_b.str();

  // The resumed log's rows must equal the uninterrupted log from the split on.
  const std::string header = "t,value,predicted,anomaly,jitter\n";
  std::size_t pos = header.size();
  for (std::uint64_t i = 0; i < split; ++i) pos = text_a.find('\n', pos) + 1;
  const bool resume_ok = header + text_a.substr(pos) == log_resumed.str() && resumed == a;
  return {identical && resume_ok,
          std::string("two 50k-step step logs ") + (identical ? "byte-identical" : "DIFFER") +
              fmt(" (%.0f bytes); resume at step 25000 ", static_cast<double>(text_a.size())) +
              (resume_ok ? "matches the uninterrupted run bit-exactly" : "DIVERGES")};
}

// ---- 9: generator statistics ----

Outcome criterion_9() {
  SynthConfig quiet;
  quiet.p_jitter = 0.0;
  SignalGenerator noise(quiet);
  double sum = 0.0, lo = 0.0, hi = 0.0;
  for (int i = 0; i < kGeneratorSamples; ++i) {
    const double v = noise.next_sample().value;
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = sum / kGeneratorSamples;

  SignalGenerator mixed{SynthConfig{}};
  int onsets = 0;
  for (int i = 0; i < kGeneratorSamples; ++i) onsets += mixed.next_sample().spawned ? 1 : 0;

  const bool pass = lo >= -1.0 && hi <= 1.0 && std::abs(mean) <= kNoiseMeanTolerance &&
                    std::abs(onsets - kOnsetExpected) <= kOnsetTolerance;
  return {pass, fmt("noise range [%.4f, %.4f], mean %.5f; %.0f onsets in 1e6 steps (5000 +- 350)", lo, hi,
                    mean, onsets)};
}

} // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"learning-curve drop by window 10", criterion_1}},
      {2, {"full adaptation on noise by window 250", criterion_2}},
      {3, {"detection after adaptation", criterion_3}},
      {4, {"cold-start anomaly", criterion_4}},
      {5, {"spatial pooler vs brute-force oracle", criterion_5}},
      {6, {"temporal memory 3-pattern cycle", criterion_6}},
      {7, {"invariants under fuzzing", criterion_7}},
      {8, {"determinism and checkpoint resume", criterion_8}},
      {9, {"generator statistics", criterion_9}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (!criteria.count(n)) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty()) {
    for (const auto& [n, _] : criteria) selected.push_back(n);
  }

  std::map<int, Outcome> results;
  for (int n : selected) {
    const auto& [name, run] = criteria.at(n);
    progress(std::string("criterion ") + std::to_string(n) + ": " + name);
    Stopwatch clock;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %-40s %s  %s [%.1fs]\n", n, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), clock.seconds());
    std::fflush(stdout);
    results[n] = o;
  }
  int failed = 0;
  for (const auto& [n, o] : results) failed += o.pass ? 0 : 1;
  std::printf("acceptance: %zu run, %d passed, %d failed\n", results.size(),
              static_cast<int>(results.size()) - failed, failed);
  return failed == 0 ? 0 : 1;
}
