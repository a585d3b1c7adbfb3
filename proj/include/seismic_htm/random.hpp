#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace seismic_htm {

/// Seedable generator with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose sequence the C++ standard fixes for
/// every conforming library. The standard distributions are not portable, so
/// all conversions to doubles and bounded integers are done here:
///   uniform01()  = (next() >> 11) * 2^-53, in [0, 1)
///   below(n)     = Lemire's multiply-shift with rejection, unbiased in [0, n)
/// Seed 1956 therefore yields the same pools on every platform.
class Random {
public:
  explicit Random(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Picks `count` distinct elements of `pool` (partial Fisher-Yates, pool is
  /// permuted in place). The chosen elements end up in pool[0, count).
  template <typename T>
  void choose_prefix(std::vector<T>& pool, std::size_t count) {
    if (count > pool.size()) count = pool.size();
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
  }

  /// Engine state as the standard textual representation.
  std::string state() const;
  void set_state(const std::string& state);

  friend bool operator==(const Random& a, const Random& b) {
    return a.engine_ == b.engine_;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace seismic_htm
