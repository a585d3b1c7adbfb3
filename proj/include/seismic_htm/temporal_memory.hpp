#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seismic_htm/binary_io.hpp"
#include "seismic_htm/random.hpp"
#include "seismic_htm/sdr.hpp"

namespace seismic_htm {

/// Sequence memory parameters. The reference tp row reads positionally as
/// (activationThreshold, cellsPerColumn, columnCount, globalDecay,
/// initialPerm, inputWidth, maxAge, maxSegmentsPerCell,
/// maxSynapsesPerSegment, minThreshold, newSynapseCount, outputType,
/// pamLength, permanenceDec, permanenceInc, seed, temporalImp, verbosity).
/// globalDecay and maxAge are 0, so no aging exists here.
struct TmConfig {
  std::uint32_t activation_threshold = 12;
  std::uint32_t cells_per_column = 32;
  std::uint32_t column_count = 2048;
  double initial_perm = 0.21;
  std::uint32_t min_threshold = 9;
  std::uint32_t new_synapse_count = 20;
  std::uint32_t max_segments_per_cell = 128;
  std::uint32_t max_synapses_per_segment = 32;
  double permanence_inc = 0.1;
  double permanence_dec = 0.1;
  /// Decrement applied to matching segments whose column stayed inactive.
  double predicted_segment_decrement = 0.0;
  std::uint64_t seed = 1960;
  /// Not in the table; NuPIC's default.
  double connected_perm = 0.5;

  std::uint32_t cell_count() const noexcept { return column_count * cells_per_column; }
  void validate() const;

  friend bool operator==(const TmConfig&, const TmConfig&) = default;
};

struct TmStepOutput {
  Sdr active_cells;           ///< width cell_count
  Sdr winner_cells;           ///< width cell_count
  Sdr predictive_cells;       ///< prediction for the next step, width cell_count
  Sdr predicted_columns_hit;  ///< active now and predicted last step, width column_count
};

/// Temporal memory over columns of cells with distal dendrite segments.
///
/// One compute() call:
///  1. Active columns holding predicted cells activate exactly those cells;
///     other active columns burst. A bursting column's winner is the owner of
///     its best matching segment, else its least used cell (lowest index on
///     ties).
///  2. With learning, active segments and best matching segments are
///     reinforced against the previous active cells and topped up with new
///     synapses to previous winner cells. Bursting columns without a matching
///     segment grow a new segment on the winner. Matching segments in
///     columns that stayed inactive are punished.
///  3. Segments with >= activation_threshold connected synapses onto the new
///     active cells make their cells predictive for the next step.
///
/// All randomness (synapse sampling) comes from one generator seeded with
/// cfg.seed.
class TemporalMemory {
public:
  using CellIdx = std::uint32_t;
  using SegmentIdx = std::uint32_t;

  struct SynapseView {
    CellIdx presynaptic;
    double permanence;
  };

  explicit TemporalMemory(const TmConfig& cfg);

  const TmConfig& config() const noexcept { return cfg_; }

  /// Throws ContractViolation when active_columns.width() != column_count.
  TmStepOutput compute(const Sdr& active_columns, bool learn);

  /// Forgets the current sequence context; learned segments stay.
  void reset();

  std::size_t num_segments() const noexcept { return live_segments_; }
  std::size_t num_segments(CellIdx cell) const { return cell_segments_.at(cell).size(); }
  std::size_t num_synapses() const noexcept { return live_synapses_; }

  /// Synapses of every live segment owned by `cell`, one inner vector per
  /// segment.
  std::vector<std::vector<SynapseView>> segments_of(CellIdx cell) const;

  /// Largest synapse count over all live segments.
  std::size_t max_synapses_on_any_segment() const;
  /// Largest segment count over all cells.
  std::size_t max_segments_on_any_cell() const;
  /// Smallest and largest permanence over all live synapses ({1, 0} if none).
  std::pair<double, double> permanence_range() const;

  Sdr predictive_cells() const;
  std::uint32_t column_of(CellIdx cell) const noexcept { return cell / cfg_.cells_per_column; }

  /// Adds a segment with the given synapses to `cell`, as if it had been
  /// learned. Used to build hand-made fixtures; does not refresh predictions
  /// until the next compute().
  SegmentIdx add_segment(CellIdx cell, std::span<const std::pair<CellIdx, double>> synapses);

  void save(BinaryWriter& out) const;
  static TemporalMemory load(BinaryReader& in, const TmConfig& cfg);

  friend bool operator==(const TemporalMemory& a, const TemporalMemory& b);

private:
  static constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;

  struct Synapse {
    CellIdx presynaptic = kInvalid;
    std::uint32_t presyn_slot = 0;  // position in the presynaptic cell's fanout
    double permanence = 0.0;
    friend bool operator==(const Synapse&, const Synapse&) = default;
  };

  // Synapses live inline in their segment, in creation order.
  struct SegmentData {
    CellIdx cell = kInvalid;
    std::uint64_t last_used = 0;
    std::vector<Synapse> synapses;
    friend bool operator==(const SegmentData&, const SegmentData&) = default;
  };

  // Segments that one presynaptic cell feeds, one entry per synapse.
  // Connected synapses are kept apart so the per-step scan can skip the rest.
  struct PresynList {
    std::vector<SegmentIdx> connected;
    std::vector<SegmentIdx> unconnected;
    friend bool operator==(const PresynList&, const PresynList&) = default;
  };

  // Active list: overlap = active connected synapses.
  // Matching list: overlap = active potential synapses.
  struct SegmentActivity {
    SegmentIdx segment;
    CellIdx cell;
    std::uint32_t overlap;
    friend bool operator==(const SegmentActivity&, const SegmentActivity&) = default;
  };

  using ActivityIter = std::vector<SegmentActivity>::const_iterator;

  bool connected(double permanence) const noexcept;

  void activate_predicted_column(ActivityIter begin, ActivityIter end, bool learn);
  void queue_learning_segments(std::span<const Sdr::Index> columns);
  void prefetch_ahead();
  void burst_column(std::uint32_t column, bool learn);
  SegmentActivity best_matching_segment(std::uint32_t column) const;
  std::uint32_t potential_overlap(SegmentIdx segment) const;
  void punish_predicted_column(ActivityIter matching_begin, ActivityIter matching_end);
  void activate_dendrites();
  void sort_by_cell(std::vector<SegmentActivity>& list);

  CellIdx least_used_cell(std::uint32_t column) const;
  SegmentIdx create_segment(CellIdx cell);
  void destroy_segment(SegmentIdx segment);
  void create_synapse(SegmentIdx segment, CellIdx presynaptic, double permanence);
  std::uint32_t adapt_segment(SegmentIdx segment, double active_delta, double inactive_delta);
  void set_permanence(SegmentIdx segment, Synapse& synapse, double permanence);
  void grow_synapses(SegmentIdx segment, std::uint32_t desired);

  std::vector<SegmentIdx>& fanout_of(CellIdx presynaptic, bool is_connected);
  void link_presynaptic(SegmentIdx segment, Synapse& synapse);
  void unlink_presynaptic(const Synapse& synapse);
  Synapse& synapse_from(SegmentIdx segment, CellIdx presynaptic);

  TmConfig cfg_;
  Random rng_;
  std::uint64_t iteration_ = 0;

  std::vector<SegmentData> segments_;
  std::vector<SegmentIdx> free_segments_;
  std::vector<std::vector<SegmentIdx>> cell_segments_;
  std::vector<CellIdx> segment_cell_;  // owner per segment, compact copy for the dendrite scan
  std::vector<PresynList> presyn_;
  std::size_t live_segments_ = 0;
  std::size_t live_synapses_ = 0;

  std::vector<CellIdx> active_cells_;
  std::vector<CellIdx> winner_cells_;
  std::vector<SegmentActivity> active_segments_;
  std::vector<SegmentActivity> matching_segments_;  // only kept while punishment is on

  // Per-step scratch, not part of the model state.
  std::vector<CellIdx> prev_active_cells_;
  std::vector<CellIdx> prev_winner_cells_;
  std::vector<std::uint8_t> prev_active_flag_;
  std::vector<std::uint32_t> winner_pos_;  // index in prev_winner_cells_, or kInvalid
  // Low byte: active potential synapses; high byte: active connected.
  std::vector<std::uint16_t> activity_count_;
  std::vector<SegmentIdx> touched_;
  std::vector<CellIdx> candidates_;
  std::vector<std::uint32_t> skip_;
  std::vector<std::pair<double, CellIdx>> rank_scratch_;  // (permanence, presynaptic)
  std::vector<SegmentActivity> sort_scratch_;
  std::vector<SegmentIdx> learn_queue_;
  std::size_t learn_cursor_ = 0;
};

} // namespace seismic_htm
