#include "seismic_htm/sdr_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

void ClassifierConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("classifier.alpha", "must be positive");
  if (steps < 1) throw ConfigError("classifier.steps", "must be at least 1");
  if (bucket_count < 2) throw ConfigError("classifier.bucket_count", "must be at least 2");
  if (input_width == 0) throw ConfigError("classifier.input_width", "must be positive");
}

SdrClassifier::SdrClassifier(const ClassifierConfig& cfg, std::vector<double> fallback_values)
    : cfg_(cfg), fallback_(std::move(fallback_values)) {
  // A zero learning rate (frozen weights) is accepted here; configuration
  // files go through validate(), which requires alpha > 0.
  if (cfg_.alpha == 0.0) {
    ClassifierConfig probe = cfg_;
    probe.alpha = 1.0;
    probe.validate();
  } else {
    cfg_.validate();
  }
  if (fallback_.size() != cfg_.bucket_count) {
    throw ContractViolation("classifier needs one fallback value per bucket");
  }
  rows_.resize(cfg_.input_width);
  means_.assign(cfg_.bucket_count, 0.0);
  counts_.assign(cfg_.bucket_count, 0);
}

void SdrClassifier::check_pattern(const Sdr& pattern) const {
  if (pattern.width() != cfg_.input_width) {
    throw ContractViolation("classifier pattern width " + std::to_string(pattern.width()) +
                            ", expected " + std::to_string(cfg_.input_width));
  }
}

std::vector<double> SdrClassifier::infer(const Sdr& pattern) const {
  check_pattern(pattern);
  std::vector<double> dist(cfg_.bucket_count, 0.0);
  for (auto bit : pattern.active()) {
    const auto& row = rows_[bit];
    if (row.empty()) continue;
    for (std::uint32_t j = 0; j < cfg_.bucket_count; ++j) dist[j] += row[j];
  }
  const double top = *std::max_element(dist.begin(), dist.end());
  double total = 0.0;
  for (auto& d : dist) {
    d = std::exp(d - top);
    total += d;
  }
  for (auto& d : dist) d /= total;
  return dist;
}

std::optional<ClassifierResult> SdrClassifier::classify(const Sdr& pattern,
                                                        std::uint32_t actual_bucket,
                                                        double actual_value, bool learn,
                                                        bool infer_now) {
  check_pattern(pattern);
  if (actual_bucket >= cfg_.bucket_count) {
    throw ContractViolation("classifier bucket " + std::to_string(actual_bucket) +
                            " out of range");
  }

  // Learning comes first so that the prediction below already reflects the
  // transition just observed. With steps == 1 the stored pattern is the one
  // inferred on the previous call, and nothing has touched the weights since,
  // so that distribution is reused.
  if (learn) {
    if (history_.size() == cfg_.steps) {
      const auto& stored = history_.front();
      auto error = cache_valid_ && cfg_.steps == 1 ? std::move(cached_dist_)
                                                   : infer(Sdr(cfg_.input_width, stored));
      for (std::uint32_t j = 0; j < cfg_.bucket_count; ++j) {
        error[j] = cfg_.alpha * ((j == actual_bucket ? 1.0 : 0.0) - error[j]);
      }
      for (auto bit : stored) {
        auto& row = rows_[bit];
        if (row.empty()) row.assign(cfg_.bucket_count, 0.0);
        for (std::uint32_t j = 0; j < cfg_.bucket_count; ++j) row[j] += error[j];
      }
    }
    ++counts_[actual_bucket];
    means_[actual_bucket] += (actual_value - means_[actual_bucket]) / counts_[actual_bucket];
  }
  cache_valid_ = false;

  std::optional<ClassifierResult> result;
  if (infer_now) {
    ClassifierResult r;
    r.distribution = infer(pattern);
    r.best_bucket = static_cast<std::uint32_t>(
        std::max_element(r.distribution.begin(), r.distribution.end()) - r.distribution.begin());
    r.predicted_value = counts_[r.best_bucket] > 0 ? means_[r.best_bucket] : fallback_[r.best_bucket];
    cached_dist_ = r.distribution;
    cache_valid_ = true;
    result = std::move(r);
  }

  history_.emplace_back(pattern.active().begin(), pattern.active().end());
  while (history_.size() > cfg_.steps) history_.pop_front();
  return result;
}

bool operator==(const SdrClassifier& a, const SdrClassifier& b) {
  return a.cfg_ == b.cfg_ && a.fallback_ == b.fallback_ && a.rows_ == b.rows_ &&
         a.means_ == b.means_ && a.counts_ == b.counts_ && a.history_ == b.history_;
}

double SdrClassifier::weight(std::uint32_t input_bit, std::uint32_t bucket) const {
  if (input_bit >= cfg_.input_width || bucket >= cfg_.bucket_count) {
    throw ContractViolation("classifier weight index out of range");
  }
  const auto& row = rows_[input_bit];
  return row.empty() ? 0.0 : row[bucket];
}

std::optional<double> SdrClassifier::bucket_mean(std::uint32_t bucket) const {
  if (bucket >= cfg_.bucket_count) throw ContractViolation("bucket out of range");
  if (counts_[bucket] == 0) return std::nullopt;
  return means_[bucket];
}

void SdrClassifier::save(BinaryWriter& out) const {
  std::uint64_t nonempty = 0;
  for (const auto& row : rows_) nonempty += row.empty() ? 0 : 1;
  out.u64(nonempty);
  for (std::uint32_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].empty()) continue;
    out.u32(i);
    for (auto w : rows_[i]) out.f64(w);
  }
  out.f64s(means_);
  out.u64(counts_.size());
  for (auto c : counts_) out.u64(c);
  out.u64(history_.size());
  for (const auto& h : history_) out.u32s(h);
}

SdrClassifier SdrClassifier::load(BinaryReader& in, const ClassifierConfig& cfg,
                                  std::vector<double> fallback_values) {
  SdrClassifier c(cfg, std::move(fallback_values));
  const auto rows = in.count(4 + 8ull * cfg.bucket_count);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto i = in.u32();
    if (i >= cfg.input_width || !c.rows_[i].empty()) throw FormatError("classifier row is corrupt");
    auto& row = c.rows_[i];
    row.resize(cfg.bucket_count);
    for (auto& w : row) {
      w = in.f64();
      if (!std::isfinite(w)) throw FormatError("classifier weight is not finite");
    }
  }
  c.means_ = in.f64s();
  if (c.means_.size() != cfg.bucket_count) throw FormatError("classifier means have wrong size");
  if (in.count(8) != cfg.bucket_count) throw FormatError("classifier counts have wrong size");
  for (auto& n : c.counts_) n = in.u64();
  const auto hist = in.count(8);
  if (hist > cfg.steps) throw FormatError("classifier history longer than steps");
  for (std::size_t h = 0; h < hist; ++h) {
    auto pattern = in.u32s();
    for (auto bit : pattern) {
      if (bit >= cfg.input_width) throw FormatError("classifier history is corrupt");
    }
    c.history_.push_back(std::move(pattern));
  }
  return c;
}

} // namespace seismic_htm
