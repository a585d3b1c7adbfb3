#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace seismic_htm {

/// Sparse binary vector of fixed width, stored as the ascending list of its
/// active bit positions. Immutable once built.
class Sdr {
public:
  using Index = std::uint32_t;

  Sdr() = default;

  /// Builds an SDR from arbitrary-order indices. Throws ContractViolation on
  /// an index >= width or a duplicated index.
  Sdr(Index width, std::vector<Index> active);
  Sdr(Index width, std::initializer_list<Index> active);

  /// Width with no active bits.
  explicit Sdr(Index width) : width_(width) {}

  /// Contiguous run [first, first + count).
  static Sdr range(Index width, Index first, Index count);

  Index width() const noexcept { return width_; }
  std::span<const Index> active() const noexcept { return active_; }
  std::size_t size() const noexcept { return active_.size(); }
  bool empty() const noexcept { return active_.empty(); }
  bool contains(Index bit) const noexcept;

  /// `width:{w} active:[i1,i2,...]`
  std::string to_string() const;

  friend bool operator==(const Sdr&, const Sdr&) = default;

private:
  Index width_ = 0;
  std::vector<Index> active_;
};

/// |a ∩ b|. Throws ContractViolation when widths differ.
std::size_t overlap(const Sdr& a, const Sdr& b);

/// a ∪ b. Throws ContractViolation when widths differ.
Sdr set_union(const Sdr& a, const Sdr& b);

/// True when every active bit of `sub` is active in `super`.
bool is_subset(const Sdr& sub, const Sdr& super);

} // namespace seismic_htm
