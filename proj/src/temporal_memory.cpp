#include "seismic_htm/temporal_memory.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

namespace {

constexpr double kPermanenceEpsilon = 1e-9;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace

void TmConfig::validate() const {
  if (column_count == 0) throw ConfigError("tp.column_count", "must be positive");
  if (cells_per_column == 0) throw ConfigError("tp.cells_per_column", "must be positive");
  if (min_threshold > activation_threshold) {
    throw ConfigError("tp.min_threshold", "must not exceed activation_threshold");
  }
  if (activation_threshold > max_synapses_per_segment) {
    throw ConfigError("tp.activation_threshold", "must not exceed max_synapses_per_segment");
  }
  if (max_segments_per_cell == 0) throw ConfigError("tp.max_segments_per_cell", "must be positive");
  if (max_synapses_per_segment == 0 || max_synapses_per_segment > 255) {
    throw ConfigError("tp.max_synapses_per_segment", "must be in [1, 255]");
  }
  if (!in_unit(initial_perm)) throw ConfigError("tp.initial_perm", "must be in [0, 1]");
  if (!in_unit(permanence_inc)) throw ConfigError("tp.permanence_inc", "must be in [0, 1]");
  if (!in_unit(permanence_dec)) throw ConfigError("tp.permanence_dec", "must be in [0, 1]");
  if (!in_unit(predicted_segment_decrement)) {
    throw ConfigError("tp.predicted_segment_decrement", "must be in [0, 1]");
  }
  if (!in_unit(connected_perm)) throw ConfigError("tp.connected_perm", "must be in [0, 1]");
  if (static_cast<std::uint64_t>(column_count) * cells_per_column >= 0xFFFFFFFFull) {
    throw ConfigError("tp.cells_per_column", "cell count overflows 32-bit indices");
  }
}

TemporalMemory::TemporalMemory(const TmConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  cell_segments_.resize(cfg_.cell_count());
  presyn_.resize(cfg_.cell_count());
  prev_active_flag_.assign(cfg_.cell_count(), 0);
  winner_pos_.assign(cfg_.cell_count(), kInvalid);
}

bool TemporalMemory::connected(double permanence) const noexcept {
  return permanence >= cfg_.connected_perm - kPermanenceEpsilon;
}

TmStepOutput TemporalMemory::compute(const Sdr& active_columns, bool learn) {
  if (active_columns.width() != cfg_.column_count) {
    throw ContractViolation("temporal memory input width " +
                            std::to_string(active_columns.width()) + ", expected " +
                            std::to_string(cfg_.column_count));
  }
  if (learn) ++iteration_;

  prev_active_cells_.swap(active_cells_);
  prev_winner_cells_.swap(winner_cells_);
  active_cells_.clear();
  winner_cells_.clear();
  for (auto cell : prev_active_cells_) prev_active_flag_[cell] = 1;
  for (std::uint32_t i = 0; i < prev_winner_cells_.size(); ++i) winner_pos_[prev_winner_cells_[i]] = i;

  std::vector<Sdr::Index> hit;
  const auto columns = active_columns.active();
  if (learn) queue_learning_segments(columns);
  auto col_it = columns.begin();
  auto act_it = active_segments_.cbegin();
  auto match_it = matching_segments_.cbegin();
  const auto column_of_activity = [&](const SegmentActivity& a) { return column_of(a.cell); };

  // Walk active columns, active segments and matching segments together,
  // one column at a time in ascending order.
  while (true) {
    std::uint32_t column = cfg_.column_count;
    if (col_it != columns.end()) column = std::min(column, *col_it);
    if (act_it != active_segments_.cend()) column = std::min(column, column_of_activity(*act_it));
    if (match_it != matching_segments_.cend()) {
      column = std::min(column, column_of_activity(*match_it));
    }
    if (column == cfg_.column_count) break;

    const bool is_active = col_it != columns.end() && *col_it == column;
    if (is_active) ++col_it;
    auto act_end = act_it;
    while (act_end != active_segments_.cend() && column_of_activity(*act_end) == column) ++act_end;
    auto match_end = match_it;
    while (match_end != matching_segments_.cend() && column_of_activity(*match_end) == column) {
      ++match_end;
    }

    if (is_active) {
      if (act_it != act_end) {
        hit.push_back(column);
        activate_predicted_column(act_it, act_end, learn);
      } else {
        burst_column(column, learn);
      }
    } else if (learn) {
      punish_predicted_column(match_it, match_end);
    }
    act_it = act_end;
    match_it = match_end;
  }

  for (auto cell : prev_active_cells_) prev_active_flag_[cell] = 0;
  for (auto cell : prev_winner_cells_) winner_pos_[cell] = kInvalid;

  activate_dendrites();

  TmStepOutput out;
  out.active_cells = Sdr(cfg_.cell_count(), active_cells_);
  out.winner_cells = Sdr(cfg_.cell_count(), winner_cells_);
  out.predictive_cells = predictive_cells();
  out.predicted_columns_hit = Sdr(cfg_.column_count, std::move(hit));
  return out;
}

void TemporalMemory::activate_predicted_column(ActivityIter begin, ActivityIter end, bool learn) {
  for (auto it = begin; it != end; ++it) {
    if (active_cells_.empty() || active_cells_.back() != it->cell) {
      active_cells_.push_back(it->cell);
      winner_cells_.push_back(it->cell);
    }
    if (learn) {
      prefetch_ahead();
      const auto overlap = adapt_segment(it->segment, cfg_.permanence_inc, cfg_.permanence_dec);
      segments_[it->segment].last_used = iteration_;
      if (cfg_.new_synapse_count > overlap) {
        grow_synapses(it->segment, cfg_.new_synapse_count - overlap);
      }
    }
  }
}

// Learning touches about a thousand scattered segments per step once the
// model is trained, so their synapse arrays are prefetched a few segments
// ahead in processing order. Purely a memory hint.
void TemporalMemory::queue_learning_segments(std::span<const Sdr::Index> columns) {
  learn_queue_.clear();
  learn_cursor_ = 0;
  auto a = active_segments_.cbegin();
  for (const auto c : columns) {
    while (a != active_segments_.cend() && column_of(a->cell) < c) ++a;
    for (; a != active_segments_.cend() && column_of(a->cell) == c; ++a) learn_queue_.push_back(a->segment);
  }
}

void TemporalMemory::prefetch_ahead() {
  constexpr std::size_t kHeaderDistance = 8, kDataDistance = 4;
  const auto i = learn_cursor_++;
  if (i + kHeaderDistance < learn_queue_.size()) {
    __builtin_prefetch(&segments_[learn_queue_[i + kHeaderDistance]]);
  }
  if (i + kDataDistance < learn_queue_.size()) {
    const auto& syns = segments_[learn_queue_[i + kDataDistance]].synapses;
    const auto* bytes = reinterpret_cast<const char*>(syns.data());
    const auto len = syns.size() * sizeof(Synapse);
    for (std::size_t off = 0; off < len; off += 64) __builtin_prefetch(bytes + off);
  }
}

void TemporalMemory::burst_column(std::uint32_t column, bool learn) {
  const CellIdx first = column * cfg_.cells_per_column;
  for (CellIdx c = first; c < first + cfg_.cells_per_column; ++c) active_cells_.push_back(c);

  const auto best = best_matching_segment(column);
  const bool matched = best.segment != kInvalid;
  const CellIdx winner = matched ? best.cell : least_used_cell(column);
  winner_cells_.push_back(winner);

  if (!learn) return;
  if (matched) {
    adapt_segment(best.segment, cfg_.permanence_inc, cfg_.permanence_dec);
    segments_[best.segment].last_used = iteration_;
    if (cfg_.new_synapse_count > best.overlap) {
      grow_synapses(best.segment, cfg_.new_synapse_count - best.overlap);
    }
  } else {
    const auto n = std::min<std::size_t>(cfg_.new_synapse_count, prev_winner_cells_.size());
    if (n > 0) {
      const auto segment = create_segment(winner);
      grow_synapses(segment, static_cast<std::uint32_t>(n));
    }
  }
}

// Most active potential synapses at or above min_threshold; ties go to the
// lowest cell, then the lowest segment index. Nothing in this column has
// been modified yet this step, so the overlap equals the one seen by the
// previous step's active cells.
TemporalMemory::SegmentActivity TemporalMemory::best_matching_segment(std::uint32_t column) const {
  SegmentActivity best{kInvalid, kInvalid, 0};
  const CellIdx first = column * cfg_.cells_per_column;
  for (CellIdx c = first; c < first + cfg_.cells_per_column; ++c) {
    for (auto seg : cell_segments_[c]) {
      const auto n = potential_overlap(seg);
      if (n < cfg_.min_threshold) continue;
      if (best.segment == kInvalid || n > best.overlap ||
          (n == best.overlap && c == best.cell && seg < best.segment)) {
        best = {seg, c, n};
      }
    }
  }
  return best;
}

std::uint32_t TemporalMemory::potential_overlap(SegmentIdx segment) const {
  std::uint32_t n = 0;
  for (const auto& syn : segments_[segment].synapses) n += prev_active_flag_[syn.presynaptic];
  return n;
}

void TemporalMemory::punish_predicted_column(ActivityIter matching_begin,
                                             ActivityIter matching_end) {
  for (auto it = matching_begin; it != matching_end; ++it) {
    adapt_segment(it->segment, -cfg_.predicted_segment_decrement, 0.0);
  }
}

void TemporalMemory::activate_dendrites() {
  // Potential overlaps are only needed to punish wrong predictions;
  // bursting columns compute theirs on demand.
  const bool need_matching = cfg_.predicted_segment_decrement > 0.0;
  activity_count_.resize(segments_.size(), 0);
  std::size_t refs = 0;
  for (auto cell : active_cells_) {
    refs += presyn_[cell].connected.size();
    if (need_matching) refs += presyn_[cell].unconnected.size();
  }
  touched_.resize(refs);
  std::size_t n_touched = 0;
  const auto scan = [&](const std::vector<SegmentIdx>& segs, std::uint16_t add) {
    for (const auto seg : segs) {
      auto& count = activity_count_[seg];
      touched_[n_touched] = seg;
      n_touched += count == 0;
      count = static_cast<std::uint16_t>(count + add);
    }
  };
  for (auto cell : active_cells_) {
    scan(presyn_[cell].connected, 0x101);
    if (need_matching) scan(presyn_[cell].unconnected, 0x001);
  }
  touched_.resize(n_touched);

  active_segments_.clear();
  matching_segments_.clear();
  for (auto seg : touched_) {
    const auto count = activity_count_[seg];
    activity_count_[seg] = 0;
    const std::uint32_t potential = count & 0xFFu;
    const std::uint32_t connected_active = count >> 8;
    if (connected_active >= cfg_.activation_threshold) {
      active_segments_.push_back({seg, segment_cell_[seg], connected_active});
    }
    if (need_matching && potential >= cfg_.min_threshold) {
      matching_segments_.push_back({seg, segment_cell_[seg], potential});
    }
  }
  sort_by_cell(active_segments_);
  sort_by_cell(matching_segments_);
}

// Stable LSD radix sort on the owning cell, one byte per pass. Segments of
// one cell keep their dendrite-scan order, which is a function of the model
// state alone, so the result is deterministic.
void TemporalMemory::sort_by_cell(std::vector<SegmentActivity>& list) {
  if (list.size() < 2) return;
  const CellIdx max_cell = cfg_.cell_count() - 1;
  for (unsigned shift = 0; shift == 0 || (max_cell >> shift) != 0; shift += 8) {
    std::array<std::size_t, 257> offsets{};
    for (const auto& a : list) ++offsets[((a.cell >> shift) & 0xFFu) + 1];
    for (std::size_t b = 0; b < 256; ++b) offsets[b + 1] += offsets[b];
    sort_scratch_.resize(list.size());
    for (const auto& a : list) sort_scratch_[offsets[(a.cell >> shift) & 0xFFu]++] = a;
    list.swap(sort_scratch_);
  }
}

TemporalMemory::CellIdx TemporalMemory::least_used_cell(std::uint32_t column) const {
  const CellIdx first = column * cfg_.cells_per_column;
  CellIdx best = first;
  for (CellIdx c = first + 1; c < first + cfg_.cells_per_column; ++c) {
    if (cell_segments_[c].size() < cell_segments_[best].size()) best = c;
  }
  return best;
}

TemporalMemory::SegmentIdx TemporalMemory::create_segment(CellIdx cell) {
  auto& owned = cell_segments_[cell];
  while (owned.size() >= cfg_.max_segments_per_cell) {
    SegmentIdx victim = owned.front();
    for (auto seg : owned) {
      const auto& s = segments_[seg];
      const auto& v = segments_[victim];
      if (s.last_used < v.last_used || (s.last_used == v.last_used && seg < victim)) victim = seg;
    }
    destroy_segment(victim);
  }

  SegmentIdx seg;
  if (!free_segments_.empty()) {
    seg = free_segments_.back();
    free_segments_.pop_back();
  } else {
    if (segments_.size() >= kInvalid) throw ContractViolation("segment index space exhausted");
    seg = static_cast<SegmentIdx>(segments_.size());
    segments_.emplace_back();
  }
  segments_[seg].cell = cell;
  segment_cell_.resize(segments_.size(), kInvalid);
  segment_cell_[seg] = cell;
  segments_[seg].last_used = iteration_;
  segments_[seg].synapses.clear();
  owned.push_back(seg);
  ++live_segments_;
  return seg;
}

void TemporalMemory::destroy_segment(SegmentIdx segment) {
  auto& data = segments_[segment];
  live_synapses_ -= data.synapses.size();
  while (!data.synapses.empty()) {
    unlink_presynaptic(data.synapses.back());
    data.synapses.pop_back();
  }
  auto& owned = cell_segments_[data.cell];
  owned.erase(std::find(owned.begin(), owned.end(), segment));
  data.cell = kInvalid;
  segment_cell_[segment] = kInvalid;
  data.last_used = 0;
  free_segments_.push_back(segment);
  --live_segments_;
}

std::vector<TemporalMemory::SegmentIdx>& TemporalMemory::fanout_of(CellIdx presynaptic,
                                                                   bool is_connected) {
  auto& list = presyn_[presynaptic];
  return is_connected ? list.connected : list.unconnected;
}

TemporalMemory::Synapse& TemporalMemory::synapse_from(SegmentIdx segment, CellIdx presynaptic) {
  auto& syns = segments_[segment].synapses;
  return *std::find_if(syns.begin(), syns.end(),
                       [&](const Synapse& s) { return s.presynaptic == presynaptic; });
}

void TemporalMemory::link_presynaptic(SegmentIdx segment, Synapse& synapse) {
  auto& fan = fanout_of(synapse.presynaptic, connected(synapse.permanence));
  synapse.presyn_slot = static_cast<std::uint32_t>(fan.size());
  fan.push_back(segment);
}

// Swap-removes the synapse's fanout entry and fixes the slot of the entry
// that moved into its place.
void TemporalMemory::unlink_presynaptic(const Synapse& synapse) {
  auto& fan = fanout_of(synapse.presynaptic, connected(synapse.permanence));
  const auto slot = synapse.presyn_slot;
  const auto moved = fan.back();
  fan.pop_back();
  if (slot == fan.size()) return;
  fan[slot] = moved;
  synapse_from(moved, synapse.presynaptic).presyn_slot = slot;
}

void TemporalMemory::create_synapse(SegmentIdx segment, CellIdx presynaptic, double permanence) {
  auto& syn = segments_[segment].synapses.emplace_back(Synapse{presynaptic, 0, permanence});
  link_presynaptic(segment, syn);
  ++live_synapses_;
}

// Returns how many synapses had an active presynaptic cell beforehand.
std::uint32_t TemporalMemory::adapt_segment(SegmentIdx segment, double active_delta,
                                            double inactive_delta) {
  auto& syns = segments_[segment].synapses;
  std::uint32_t overlap = 0;
  bool any_dead = false;
  for (auto& syn : syns) {
    const bool active = prev_active_flag_[syn.presynaptic];
    overlap += active;
    set_permanence(segment, syn,
                   std::clamp(syn.permanence + (active ? active_delta : -inactive_delta), 0.0, 1.0));
    any_dead |= syn.permanence < kPermanenceEpsilon;
  }
  if (any_dead) {
    const auto dead = [](const Synapse& s) { return s.permanence < kPermanenceEpsilon; };
    for (const auto& syn : syns) {
      if (dead(syn)) unlink_presynaptic(syn);
    }
    const auto before = syns.size();
    std::erase_if(syns, dead);
    live_synapses_ -= before - syns.size();
    if (syns.empty()) destroy_segment(segment);
  }
  return overlap;
}

void TemporalMemory::set_permanence(SegmentIdx segment, Synapse& synapse, double permanence) {
  if (connected(synapse.permanence) == connected(permanence)) {
    synapse.permanence = permanence;
    return;
  }
  unlink_presynaptic(synapse);
  synapse.permanence = permanence;
  link_presynaptic(segment, synapse);
}

void TemporalMemory::grow_synapses(SegmentIdx segment, std::uint32_t desired) {
  // Candidates are the previous winners not yet presynaptic to this
  // segment, in winner order: copy the runs between the excluded positions.
  auto& syns = segments_[segment].synapses;
  skip_.clear();
  for (const auto& syn : syns) {
    const auto pos = winner_pos_[syn.presynaptic];
    if (pos != kInvalid) skip_.push_back(pos);
  }
  std::sort(skip_.begin(), skip_.end());
  candidates_.clear();
  auto from = prev_winner_cells_.begin();
  for (auto pos : skip_) {
    candidates_.insert(candidates_.end(), from, prev_winner_cells_.begin() + pos);
    from = prev_winner_cells_.begin() + pos + 1;
  }
  candidates_.insert(candidates_.end(), from, prev_winner_cells_.end());
  const std::size_t n =
      std::min<std::size_t>({desired, candidates_.size(), cfg_.max_synapses_per_segment});
  if (n == 0) return;

  // Make room by dropping the weakest synapses (lowest presynaptic index on ties).
  const std::size_t total = syns.size() + n;
  if (total > cfg_.max_synapses_per_segment) {
    const std::size_t overrun = total - cfg_.max_synapses_per_segment;
    rank_scratch_.clear();
    for (const auto& syn : syns) rank_scratch_.emplace_back(syn.permanence, syn.presynaptic);
    std::partial_sort(rank_scratch_.begin(), rank_scratch_.begin() + overrun, rank_scratch_.end());
    rank_scratch_.resize(overrun);
    // Each removal touches two scattered fanouts; start all the loads first.
    for (const auto& [perm, pre] : rank_scratch_) __builtin_prefetch(&presyn_[pre]);
    for (const auto& [perm, pre] : rank_scratch_) {
      const auto& fan = fanout_of(pre, connected(perm));
      __builtin_prefetch(&fan.back());
      __builtin_prefetch(&fan[synapse_from(segment, pre).presyn_slot]);
    }
    for (const auto& [perm, pre] : rank_scratch_) {
      __builtin_prefetch(&segments_[fanout_of(pre, connected(perm)).back()]);
    }
    for (const auto& [perm, pre] : rank_scratch_) unlink_presynaptic(synapse_from(segment, pre));
    std::erase_if(syns, [&](const Synapse& s) {
      return std::any_of(rank_scratch_.begin(), rank_scratch_.end(),
                         [&](const auto& r) { return r.second == s.presynaptic; });
    });
    live_synapses_ -= overrun;
  }

  rng_.choose_prefix(candidates_, n);
  const bool starts_connected = connected(cfg_.initial_perm);
  for (std::size_t i = 0; i < n; ++i) __builtin_prefetch(&presyn_[candidates_[i]]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& fan = fanout_of(candidates_[i], starts_connected);
    __builtin_prefetch(fan.data() + fan.size());
  }
  for (std::size_t i = 0; i < n; ++i) create_synapse(segment, candidates_[i], cfg_.initial_perm);
}

void TemporalMemory::reset() {
  active_cells_.clear();
  winner_cells_.clear();
  active_segments_.clear();
  matching_segments_.clear();
}

Sdr TemporalMemory::predictive_cells() const {
  std::vector<Sdr::Index> cells;
  for (const auto& a : active_segments_) {
    if (cells.empty() || cells.back() != a.cell) cells.push_back(a.cell);
  }
  return Sdr(cfg_.cell_count(), std::move(cells));
}

std::vector<std::vector<TemporalMemory::SynapseView>> TemporalMemory::segments_of(
    CellIdx cell) const {
  std::vector<std::vector<SynapseView>> out;
  for (auto seg : cell_segments_.at(cell)) {
    auto& syns = out.emplace_back();
    for (const auto& syn : segments_[seg].synapses) syns.push_back({syn.presynaptic, syn.permanence});
  }
  return out;
}

std::size_t TemporalMemory::max_synapses_on_any_segment() const {
  std::size_t m = 0;
  for (const auto& s : segments_) {
    if (s.cell != kInvalid) m = std::max(m, s.synapses.size());
  }
  return m;
}

std::size_t TemporalMemory::max_segments_on_any_cell() const {
  std::size_t m = 0;
  for (const auto& owned : cell_segments_) m = std::max(m, owned.size());
  return m;
}

std::pair<double, double> TemporalMemory::permanence_range() const {
  std::pair<double, double> r{1.0, 0.0};
  for (const auto& s : segments_) {
    for (const auto& syn : s.synapses) {
      r.first = std::min(r.first, syn.permanence);
      r.second = std::max(r.second, syn.permanence);
    }
  }
  return r;
}

TemporalMemory::SegmentIdx TemporalMemory::add_segment(
    CellIdx cell, std::span<const std::pair<CellIdx, double>> synapses) {
  if (cell >= cfg_.cell_count()) throw ContractViolation("cell out of range");
  if (synapses.size() > cfg_.max_synapses_per_segment) {
    throw ContractViolation("too many synapses for one segment");
  }
  std::vector<CellIdx> seen;
  for (const auto& [pre, perm] : synapses) {
    if (pre >= cfg_.cell_count()) throw ContractViolation("presynaptic cell out of range");
    if (!in_unit(perm)) throw ContractViolation("permanence out of [0, 1]");
    if (std::find(seen.begin(), seen.end(), pre) != seen.end()) {
      throw ContractViolation("duplicate presynaptic cell on segment");
    }
    seen.push_back(pre);
  }
  const auto seg = create_segment(cell);
  for (const auto& [pre, perm] : synapses) create_synapse(seg, pre, perm);
  return seg;
}

void TemporalMemory::save(BinaryWriter& out) const {
  out.str(rng_.state());
  out.u64(iteration_);

  out.u64(segments_.size());
  for (const auto& s : segments_) {
    out.u32(s.cell);
    out.u64(s.last_used);
    out.u64(s.synapses.size());
    for (const auto& syn : s.synapses) {
      out.u32(syn.presynaptic);
      out.u32(syn.presyn_slot);
      out.f64(syn.permanence);
    }
  }
  out.u32s(free_segments_);

  for (const auto& list : presyn_) {
    out.u32s(list.connected);
    out.u32s(list.unconnected);
  }
  for (const auto& owned : cell_segments_) out.u32s(owned);

  out.u32s(active_cells_);
  out.u32s(winner_cells_);
  for (const auto* list : {&active_segments_, &matching_segments_}) {
    out.u64(list->size());
    for (const auto& a : *list) {
      out.u32(a.segment);
      out.u32(a.cell);
      out.u32(a.overlap);
    }
  }
}

TemporalMemory TemporalMemory::load(BinaryReader& in, const TmConfig& cfg) {
  TemporalMemory tm(cfg);
  tm.rng_.set_state(in.str());
  tm.iteration_ = in.u64();

  const auto cells = cfg.cell_count();
  const auto check_cell = [&](std::uint32_t c) {
    if (c >= cells) throw FormatError("temporal memory cell index out of range");
  };
  const auto corrupt = [] { return FormatError("temporal memory index is corrupt"); };

  tm.segments_.resize(in.count(20));
  for (auto& s : tm.segments_) {
    s.cell = in.u32();
    s.last_used = in.u64();
    s.synapses.resize(in.count(16));
    for (auto& syn : s.synapses) {
      syn.presynaptic = in.u32();
      syn.presyn_slot = in.u32();
      syn.permanence = in.f64();
      check_cell(syn.presynaptic);
      if (!in_unit(syn.permanence)) throw FormatError("temporal memory synapse is corrupt");
    }
    if (s.cell != kInvalid) {
      check_cell(s.cell);
      ++tm.live_segments_;
      tm.live_synapses_ += s.synapses.size();
    } else if (!s.synapses.empty()) {
      throw corrupt();
    }
  }
  tm.free_segments_ = in.u32s();
  tm.segment_cell_.resize(tm.segments_.size());
  for (std::size_t i = 0; i < tm.segments_.size(); ++i) tm.segment_cell_[i] = tm.segments_[i].cell;

  // Every fanout entry must point back at a synapse in the matching list
  // and slot; with the count check this makes the index a bijection.
  std::size_t linked = 0;
  for (CellIdx cell = 0; cell < cells; ++cell) {
    for (const bool want_connected : {true, false}) {
      auto& fan = tm.fanout_of(cell, want_connected);
      fan = in.u32s();
      for (std::uint32_t slot = 0; slot < fan.size(); ++slot) {
        if (fan[slot] >= tm.segments_.size()) throw corrupt();
        const auto& syns = tm.segments_[fan[slot]].synapses;
        const auto it = std::find_if(syns.begin(), syns.end(),
                                     [&](const Synapse& s) { return s.presynaptic == cell; });
        if (it == syns.end() || it->presyn_slot != slot ||
            tm.connected(it->permanence) != want_connected) {
          throw FormatError("temporal memory presynaptic index is corrupt");
        }
      }
      linked += fan.size();
    }
  }
  if (linked != tm.live_synapses_) throw FormatError("temporal memory presynaptic index is corrupt");

  for (auto& owned : tm.cell_segments_) {
    owned = in.u32s();
    for (auto seg : owned) {
      if (seg >= tm.segments_.size()) throw corrupt();
    }
  }

  tm.active_cells_ = in.u32s();
  tm.winner_cells_ = in.u32s();
  for (auto c : tm.active_cells_) check_cell(c);
  for (auto c : tm.winner_cells_) check_cell(c);
  for (auto* list : {&tm.active_segments_, &tm.matching_segments_}) {
    list->resize(in.count(12));
    for (auto& a : *list) {
      a.segment = in.u32();
      a.cell = in.u32();
      a.overlap = in.u32();
      if (a.segment >= tm.segments_.size()) throw corrupt();
      check_cell(a.cell);
    }
  }
  return tm;
}

bool operator==(const TemporalMemory& a, const TemporalMemory& b) {
  return a.rng_ == b.rng_ && a.iteration_ == b.iteration_ && a.segments_ == b.segments_ &&
         a.free_segments_ == b.free_segments_ && a.presyn_ == b.presyn_ &&
         a.cell_segments_ == b.cell_segments_ && a.active_cells_ == b.active_cells_ &&
         a.winner_cells_ == b.winner_cells_ && a.active_segments_ == b.active_segments_ &&
         a.matching_segments_ == b.matching_segments_;
}

} // namespace seismic_htm
