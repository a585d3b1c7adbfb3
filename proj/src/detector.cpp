#include "seismic_htm/detector.hpp"

#include <algorithm>
#include <cmath>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

double raw_anomaly(const Sdr& active_columns, const Sdr& predicted_columns_hit) {
  if (!is_subset(predicted_columns_hit, active_columns)) {
    throw ContractViolation("predicted columns must be a subset of the active columns");
  }
  if (active_columns.empty()) return 0.0;
  return 1.0 - static_cast<double>(predicted_columns_hit.size()) /
                   static_cast<double>(active_columns.size());
}

namespace {

std::vector<double> midpoints(const EncoderConfig& enc) {
  std::vector<double> out(enc.bucket_count());
  for (std::uint32_t b = 0; b < out.size(); ++b) out[b] = bucket_midpoint(b, enc);
  return out;
}

const HtmConfig& validated(const HtmConfig& cfg) {
  cfg.validate();
  return cfg;
}

} // namespace

DetectorModel::DetectorModel(const HtmConfig& cfg)
    : encoder_(validated(cfg).sensor),
      sp_(cfg.sp),
      tm_(cfg.tp),
      classifier_(cfg.classifier, midpoints(cfg.sensor)) {}

StepRecord DetectorModel::step(double value, bool jitter_active) {
  const auto bucket = bucket_index(value, encoder_);
  const Sdr input = Sdr::range(encoder_.n, bucket, encoder_.w);
  const Sdr columns = sp_.compute(input, true);
  const TmStepOutput tm_out = tm_.compute(columns, true);

  StepRecord rec;
  rec.t = t_++;
  rec.value = value;
  rec.jitter_active = jitter_active;
  rec.anomaly_score = raw_anomaly(columns, tm_out.predicted_columns_hit);
  rec.predicted_value = pending_;

  const auto result = classifier_.classify(tm_out.active_cells, bucket, value, true, true);
  pending_ = result->predicted_value;
  return rec;
}

void DetectorModel::save(BinaryWriter& out) const {
  out.u64(t_);
  out.boolean(pending_.has_value());
  out.f64(pending_.value_or(0.0));
  sp_.save(out);
  tm_.save(out);
  classifier_.save(out);
}

DetectorModel DetectorModel::load(BinaryReader& in, const HtmConfig& cfg) {
  const auto t = in.u64();
  const bool has_pending = in.boolean();
  const double pending = in.f64();
  auto sp = SpatialPooler::load(in, cfg.sp);
  auto tm = TemporalMemory::load(in, cfg.tp);
  auto clf = SdrClassifier::load(in, cfg.classifier, midpoints(cfg.sensor));
  DetectorModel m(cfg);
  m.sp_ = std::move(sp);
  m.tm_ = std::move(tm);
  m.classifier_ = std::move(clf);
  m.t_ = t;
  if (has_pending) m.pending_ = pending;
  return m;
}

std::vector<WindowStats> window_stats(std::span<const StepRecord> records,
                                      std::uint32_t window_len) {
  if (window_len == 0) throw ContractViolation("window length must be positive");
  std::vector<WindowStats> out;
  const std::size_t windows = records.size() / window_len;
  for (std::size_t w = 0; w < windows; ++w) {
    double sq = 0.0, abs_sum = 0.0, anomaly = 0.0;
    std::size_t predicted = 0;
    for (std::size_t i = w * window_len; i < (w + 1) * window_len; ++i) {
      const auto& r = records[i];
      anomaly += r.anomaly_score;
      if (r.predicted_value) {
        const double err = *r.predicted_value - r.value;
        sq += err * err;
        abs_sum += std::abs(err);
        ++predicted;
      }
    }
    WindowStats s;
    s.window_index = w + 1;
    s.window_len = window_len;
    s.mean_anomaly = anomaly / window_len;
    if (predicted > 0) {
      s.rms_error = std::sqrt(sq / predicted);
      s.mean_abs_error = abs_sum / predicted;
    }
    out.push_back(s);
  }
  return out;
}

DetectionReport detect_events(std::span<const StepRecord> records, double threshold,
                              std::uint32_t lag, std::uint32_t event_duration) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ContractViolation("detection threshold must be in (0, 1]");
  }
  DetectionReport report;
  const std::size_t n = records.size();

  for (std::size_t i = 0; i < n;) {
    if (!records[i].jitter_active) {
      ++report.noise_steps;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && records[j + 1].jitter_active) ++j;
    EventOutcome ev;
    ev.start = records[i].t;
    ev.end = records[j].t;
    const std::size_t last = std::min(n - 1, j + lag);
    for (std::size_t k = i; k <= last; ++k) {
      const double a = records[k].anomaly_score;
      ev.peak_anomaly = std::max(ev.peak_anomaly, a);
      if (a >= threshold && !ev.first_hit) ev.first_hit = records[k].t;
    }
    ev.detected = ev.first_hit.has_value();
    (ev.detected ? report.detected : report.missed)++;
    report.events.push_back(ev);
    i = j + 1;
  }

  // Index of the most recent jitter step at or before each position.
  std::optional<std::size_t> last_jitter;
  const std::size_t reach = static_cast<std::size_t>(event_duration) + lag;
  for (std::size_t i = 0; i < n; ++i) {
    if (records[i].jitter_active) last_jitter = i;
    const bool above = records[i].anomaly_score >= threshold;
    const bool rising = above && (i == 0 || records[i - 1].anomaly_score < threshold);
    if (!rising) continue;
    if (!last_jitter || i - *last_jitter > reach) report.false_positive_steps.push_back(records[i].t);
  }
  if (report.noise_steps > 0) {
    report.false_positives_per_10k =
        1e4 * static_cast<double>(report.false_positive_steps.size()) / report.noise_steps;
  }
  return report;
}

} // namespace seismic_htm
