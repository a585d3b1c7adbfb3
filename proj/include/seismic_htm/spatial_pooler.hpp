#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seismic_htm/binary_io.hpp"
#include "seismic_htm/random.hpp"
#include "seismic_htm/sdr.hpp"

namespace seismic_htm {

/// Proximal pooler parameters, reference sp row read in NuPIC's alphabetical
/// order (boostStrength, columnCount, globalInhibition, inputWidth,
/// numActiveColumnsPerInhArea, potentialPct, seed, spVerbosity, spatialImp,
/// synPermActiveInc, synPermConnected, synPermInactiveDec).
struct SpConfig {
  double boost_strength = 0.0;
  std::uint32_t column_count = 2048;
  bool global_inhibition = true;
  std::uint32_t input_width = 118;  ///< 0 in the table: inherited from the encoder
  std::uint32_t num_active_columns = 40;
  double potential_pct = 0.8;
  std::uint64_t seed = 1956;
  double syn_perm_active_inc = 0.05;
  double syn_perm_connected = 0.1;
  double syn_perm_inactive_dec = 0.1;

  std::uint32_t potential_pool_size() const noexcept {
    return static_cast<std::uint32_t>(potential_pct * input_width);
  }

  void validate() const;

  friend bool operator==(const SpConfig&, const SpConfig&) = default;
};

/// Global-inhibition spatial pooler without boosting.
///
/// Each column owns a fixed potential pool of input bits. Its overlap is the
/// number of connected pool synapses (permanence >= syn_perm_connected) onto
/// active input bits. The num_active_columns columns with the highest
/// positive overlap win; equal overlaps go to the lower column index.
/// Learning moves a winner's pool permanences up on active bits and down on
/// inactive ones.
class SpatialPooler {
public:
  explicit SpatialPooler(const SpConfig& cfg);

  const SpConfig& config() const noexcept { return cfg_; }

  /// Active columns for `input`. Throws ContractViolation on width mismatch.
  Sdr compute(const Sdr& input, bool learn);

  /// Connected-synapse overlap per column, without inhibition.
  std::vector<std::uint32_t> overlaps(const Sdr& input) const;

  std::span<const std::uint32_t> potential_pool(std::uint32_t column) const;
  std::span<const double> permanences(std::uint32_t column) const;
  /// Replaces one column's permanences (same order as its pool). Values are
  /// clamped to [0, 1].
  void set_permanences(std::uint32_t column, std::span<const double> values);

  void save(BinaryWriter& out) const;
  static SpatialPooler load(BinaryReader& in, const SpConfig& cfg);

  friend bool operator==(const SpatialPooler& a, const SpatialPooler& b) {
    return a.pools_ == b.pools_ && a.perms_ == b.perms_;
  }

private:
  void rebuild_connected(std::uint32_t column);
  void rebuild_all();
  bool connected(double permanence) const noexcept;

  SpConfig cfg_;
  std::uint32_t pool_size_ = 0;
  std::vector<std::uint32_t> pools_;  // column-major, pool_size_ per column, ascending
  std::vector<double> perms_;         // parallel to pools_
  // Bit set of connected input bits per column, words_ 64-bit words each.
  std::size_t words_ = 0;
  std::vector<std::uint64_t> connected_bits_;
  std::vector<std::uint8_t> input_scratch_;
};

} // namespace seismic_htm
