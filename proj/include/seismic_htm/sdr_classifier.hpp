#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "seismic_htm/binary_io.hpp"
#include "seismic_htm/sdr.hpp"

namespace seismic_htm {

struct ClassifierConfig {
  double alpha = 0.009340;
  std::uint32_t steps = 1;
  std::uint32_t bucket_count = 98;
  std::uint32_t input_width = 2048 * 32;

  void validate() const;

  friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;
};

struct ClassifierResult {
  std::vector<double> distribution;  ///< one probability per bucket
  std::uint32_t best_bucket = 0;     ///< argmax, lowest bucket on ties
  double predicted_value = 0.0;
};

/// Softmax regression from active cells to the value bucket `steps` ahead.
///
/// score_j = sum of weights[i][j] over active bits i; the distribution is
/// softmax(score). Learning takes the pattern seen `steps` calls ago and
/// moves its rows by alpha * (onehot(actual) - distribution). The predicted
/// value is the running mean of actual values seen in the winning bucket, or
/// the bucket's fallback value before any were seen.
class SdrClassifier {
public:
  /// `fallback_values` supplies one value per bucket (usually encoder bucket
  /// midpoints).
  SdrClassifier(const ClassifierConfig& cfg, std::vector<double> fallback_values);

  const ClassifierConfig& config() const noexcept { return cfg_; }

  /// Returns the inference result when `infer` is set. Throws
  /// ContractViolation on a width mismatch or an out-of-range bucket.
  std::optional<ClassifierResult> classify(const Sdr& pattern, std::uint32_t actual_bucket,
                                           double actual_value, bool learn, bool infer);

  /// Distribution for `pattern` under the current weights.
  std::vector<double> infer(const Sdr& pattern) const;

  double weight(std::uint32_t input_bit, std::uint32_t bucket) const;
  /// Running mean of actual values seen for `bucket`, if any.
  std::optional<double> bucket_mean(std::uint32_t bucket) const;

  void save(BinaryWriter& out) const;
  static SdrClassifier load(BinaryReader& in, const ClassifierConfig& cfg,
                            std::vector<double> fallback_values);

  /// Compares learned state; the inference cache is not part of it.
  friend bool operator==(const SdrClassifier& a, const SdrClassifier& b);

private:
  void check_pattern(const Sdr& pattern) const;

  ClassifierConfig cfg_;
  std::vector<double> fallback_;
  std::vector<std::vector<double>> rows_;  // empty row == all zeros
  std::vector<double> means_;
  std::vector<std::uint64_t> counts_;
  std::deque<std::vector<std::uint32_t>> history_;
  // Distribution last inferred for history_.back() under the current weights.
  std::vector<double> cached_dist_;
  bool cache_valid_ = false;
};

} // namespace seismic_htm
