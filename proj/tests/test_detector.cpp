#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seismic_htm/detector.hpp"
#include "seismic_htm/errors.hpp"
#include "seismic_htm/experiment.hpp"

using namespace seismic_htm;

namespace {

std::vector<StepRecord> quiet_records(std::size_t n) {
  std::vector<StepRecord> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i].t = i;
    r[i].predicted_value = 0.0;
  }
  return r;
}

} // namespace

TEST(RawAnomaly, Examples) {
  const auto active = Sdr::range(2048, 100, 40);
  EXPECT_DOUBLE_EQ(raw_anomaly(active, active), 0.0);
  EXPECT_DOUBLE_EQ(raw_anomaly(active, Sdr(2048)), 1.0);
  EXPECT_DOUBLE_EQ(raw_anomaly(active, Sdr::range(2048, 100, 20)), 0.5);
  EXPECT_DOUBLE_EQ(raw_anomaly(Sdr(2048), Sdr(2048)), 0.0);
  EXPECT_THROW(raw_anomaly(active, Sdr(2048, {5})), ContractViolation);
}

TEST(WindowStats, CountsAndConstantError) {
  auto records = quiet_records(2400);
  for (auto& r : records) {
    r.value = 1.0;
    r.predicted_value = 1.5;
  }
  const auto w = window_stats(records, 1200);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].window_index, 1u);
  EXPECT_EQ(w[1].window_index, 2u);
  for (const auto& s : w) {
    EXPECT_DOUBLE_EQ(s.rms_error, 0.5);
    EXPECT_DOUBLE_EQ(s.mean_abs_error, 0.5);
    EXPECT_DOUBLE_EQ(s.mean_anomaly, 0.0);
  }
  EXPECT_EQ(window_stats(quiet_records(2399), 1200).size(), 1u);
  EXPECT_TRUE(window_stats(std::vector<StepRecord>{}, 1200).empty());
}

TEST(WindowStats, AbsentPredictionsExcludedFromErrors) {
  auto records = quiet_records(4);
  records[0].predicted_value.reset();
  records[0].value = 100.0;
  records[0].anomaly_score = 1.0;
  for (std::size_t i = 1; i < 4; ++i) records[i].value = 2.0;
  const auto w = window_stats(records, 4);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_DOUBLE_EQ(w[0].rms_error, 2.0);
  EXPECT_DOUBLE_EQ(w[0].mean_anomaly, 0.25);
}

TEST(DetectEvents, QuietStreamHasNothing) {
  auto records = quiet_records(5000);
  const auto report = detect_events(records, 0.5, 5);
  EXPECT_TRUE(report.events.empty());
  EXPECT_TRUE(report.false_positive_steps.empty());
  EXPECT_EQ(report.noise_steps, 5000u);
  EXPECT_DOUBLE_EQ(report.false_positives_per_10k, 0.0);
}

TEST(DetectEvents, SingleEventWithLateCrossing) {
  auto records = quiet_records(1000);
  for (std::size_t t = 200; t < 225; ++t) records[t].jitter_active = true;
  records[229].anomaly_score = 0.7;  // end (224) + lag 5
  const auto report = detect_events(records, 0.5, 5);
  ASSERT_EQ(report.events.size(), 1u);
  EXPECT_EQ(report.events[0].start, 200u);
  EXPECT_EQ(report.events[0].end, 224u);
  EXPECT_TRUE(report.events[0].detected);
  EXPECT_EQ(report.events[0].first_hit, 229u);
  EXPECT_EQ(report.detected, 1u);
  EXPECT_TRUE(report.false_positive_steps.empty());
}

TEST(DetectEvents, CrossingPastLagIsMissAndFalsePositiveRules) {
  auto records = quiet_records(1000);
  for (std::size_t t = 200; t < 225; ++t) records[t].jitter_active = true;
  records[230].anomaly_score = 0.9;  // one step too late: miss, but still near the event
  records[600].anomaly_score = 0.5;  // threshold is inclusive: spike on noise
  records[601].anomaly_score = 0.8;  // same run, not a new spike
  records[700].anomaly_score = 0.49;
  const auto report = detect_events(records, 0.5, 5);
  ASSERT_EQ(report.events.size(), 1u);
  EXPECT_FALSE(report.events[0].detected);
  EXPECT_EQ(report.missed, 1u);
  EXPECT_EQ(report.false_positive_steps, std::vector<std::uint64_t>{600});
  EXPECT_EQ(report.noise_steps, 975u);
  EXPECT_NEAR(report.false_positives_per_10k, 1e4 / 975.0, 1e-9);
}

TEST(DetectorModel, FirstStepIsColdStart) {
  DetectorModel model{HtmConfig{}};
  const auto first = model.step(0.3, false);
  EXPECT_EQ(first.t, 0u);
  EXPECT_DOUBLE_EQ(first.anomaly_score, 1.0);
  EXPECT_FALSE(first.predicted_value.has_value());
  EXPECT_TRUE(model.pending_prediction().has_value());
  const auto second = model.step(-0.2, false);
  EXPECT_EQ(second.t, 1u);
  ASSERT_TRUE(second.predicted_value.has_value());
}

TEST(DetectorModel, ShortRunInvariantsAndReplay) {
  HtmConfig cfg;
  Experiment a(cfg), b(cfg);
  for (int i = 0; i < 1500; ++i) {
    const auto sa = a.advance();
    const auto sb = b.advance();
    ASSERT_EQ(sa.record, sb.record);
    ASSERT_GE(sa.record.anomaly_score, 0.0);
    ASSERT_LE(sa.record.anomaly_score, 1.0);
    if (sa.record.predicted_value) ASSERT_TRUE(std::isfinite(*sa.record.predicted_value));
  }
  EXPECT_TRUE(a == b);
}
