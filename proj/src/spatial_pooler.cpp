#include "seismic_htm/spatial_pooler.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

namespace {

constexpr double kPermanenceEpsilon = 1e-9;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace

void SpConfig::validate() const {
  if (column_count == 0) throw ConfigError("sp.column_count", "must be positive");
  if (input_width == 0) throw ConfigError("sp.input_width", "must be positive");
  if (num_active_columns == 0 || num_active_columns >= column_count) {
    throw ConfigError("sp.num_active_columns", "must be in [1, column_count)");
  }
  if (!(potential_pct > 0.0 && potential_pct <= 1.0)) {
    throw ConfigError("sp.potential_pct", "must be in (0, 1]");
  }
  if (potential_pool_size() == 0) {
    throw ConfigError("sp.potential_pct", "potential pool would be empty");
  }
  if (!in_unit(syn_perm_active_inc)) throw ConfigError("sp.syn_perm_active_inc", "must be in [0, 1]");
  if (!in_unit(syn_perm_connected)) throw ConfigError("sp.syn_perm_connected", "must be in [0, 1]");
  if (!in_unit(syn_perm_inactive_dec)) throw ConfigError("sp.syn_perm_inactive_dec", "must be in [0, 1]");
  if (boost_strength != 0.0) throw ConfigError("sp.boost_strength", "only 0.0 is supported");
  if (!global_inhibition) throw ConfigError("sp.global_inhibition", "local inhibition is not supported");
}

SpatialPooler::SpatialPooler(const SpConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  pool_size_ = cfg_.potential_pool_size();
  pools_.resize(static_cast<std::size_t>(cfg_.column_count) * pool_size_);
  perms_.resize(pools_.size());

  Random rng(cfg_.seed);
  std::vector<std::uint32_t> bits(cfg_.input_width);
  const double lo = cfg_.syn_perm_connected - 0.1;
  const double hi = cfg_.syn_perm_connected + 0.1;
  for (std::uint32_t c = 0; c < cfg_.column_count; ++c) {
    std::iota(bits.begin(), bits.end(), 0u);
    rng.choose_prefix(bits, pool_size_);
    auto pool = pools_.begin() + static_cast<std::ptrdiff_t>(c) * pool_size_;
    std::copy_n(bits.begin(), pool_size_, pool);
    std::sort(pool, pool + pool_size_);
    for (std::uint32_t s = 0; s < pool_size_; ++s) {
      perms_[static_cast<std::size_t>(c) * pool_size_ + s] =
          std::clamp(rng.uniform(lo, hi), 0.0, 1.0);
    }
  }
  rebuild_all();
}

void SpatialPooler::rebuild_all() {
  words_ = (cfg_.input_width + 63) / 64;
  connected_bits_.assign(static_cast<std::size_t>(cfg_.column_count) * words_, 0);
  for (std::uint32_t c = 0; c < cfg_.column_count; ++c) rebuild_connected(c);
  input_scratch_.assign(cfg_.input_width, 0);
}

void SpatialPooler::rebuild_connected(std::uint32_t column) {
  const std::size_t base = static_cast<std::size_t>(column) * pool_size_;
  auto* bits = connected_bits_.data() + static_cast<std::size_t>(column) * words_;
  std::fill(bits, bits + words_, 0);
  for (std::uint32_t s = 0; s < pool_size_; ++s) {
    if (connected(perms_[base + s])) {
      const auto bit = pools_[base + s];
      bits[bit / 64] |= std::uint64_t{1} << (bit % 64);
    }
  }
}

bool SpatialPooler::connected(double permanence) const noexcept {
  return permanence >= cfg_.syn_perm_connected - kPermanenceEpsilon;
}

std::vector<std::uint32_t> SpatialPooler::overlaps(const Sdr& input) const {
  if (input.width() != cfg_.input_width) {
    throw ContractViolation("spatial pooler input width " + std::to_string(input.width()) +
                            ", expected " + std::to_string(cfg_.input_width));
  }
  std::vector<std::uint64_t> mask(words_, 0);
  for (auto bit : input.active()) mask[bit / 64] |= std::uint64_t{1} << (bit % 64);
  std::vector<std::uint32_t> result(cfg_.column_count, 0);
  const auto* bits = connected_bits_.data();
  for (std::uint32_t c = 0; c < cfg_.column_count; ++c, bits += words_) {
    std::uint32_t n = 0;
    for (std::size_t w = 0; w < words_; ++w) n += static_cast<std::uint32_t>(std::popcount(bits[w] & mask[w]));
    result[c] = n;
  }
  return result;
}

Sdr SpatialPooler::compute(const Sdr& input, bool learn) {
  const auto overlap = overlaps(input);

  std::vector<std::uint32_t> candidates;
  for (std::uint32_t c = 0; c < cfg_.column_count; ++c) {
    if (overlap[c] > 0) candidates.push_back(c);
  }
  const auto better = [&](std::uint32_t a, std::uint32_t b) {
    return overlap[a] != overlap[b] ? overlap[a] > overlap[b] : a < b;
  };
  const std::size_t k = std::min<std::size_t>(cfg_.num_active_columns, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), better);
  candidates.resize(k);

  if (learn && !candidates.empty()) {
    for (auto bit : input.active()) input_scratch_[bit] = 1;
    for (auto c : candidates) {
      const std::size_t base = static_cast<std::size_t>(c) * pool_size_;
      for (std::uint32_t s = 0; s < pool_size_; ++s) {
        double& p = perms_[base + s];
        p += input_scratch_[pools_[base + s]] ? cfg_.syn_perm_active_inc
                                              : -cfg_.syn_perm_inactive_dec;
        p = std::clamp(p, 0.0, 1.0);
      }
      rebuild_connected(c);
    }
    for (auto bit : input.active()) input_scratch_[bit] = 0;
  }
  return Sdr(cfg_.column_count, std::move(candidates));
}

std::span<const std::uint32_t> SpatialPooler::potential_pool(std::uint32_t column) const {
  if (column >= cfg_.column_count) throw ContractViolation("column out of range");
  return {pools_.data() + static_cast<std::size_t>(column) * pool_size_, pool_size_};
}

std::span<const double> SpatialPooler::permanences(std::uint32_t column) const {
  if (column >= cfg_.column_count) throw ContractViolation("column out of range");
  return {perms_.data() + static_cast<std::size_t>(column) * pool_size_, pool_size_};
}

void SpatialPooler::set_permanences(std::uint32_t column, std::span<const double> values) {
  if (column >= cfg_.column_count) throw ContractViolation("column out of range");
  if (values.size() != pool_size_) throw ContractViolation("permanence count must equal pool size");
  const std::size_t base = static_cast<std::size_t>(column) * pool_size_;
  for (std::size_t s = 0; s < values.size(); ++s) perms_[base + s] = std::clamp(values[s], 0.0, 1.0);
  rebuild_connected(column);
}

void SpatialPooler::save(BinaryWriter& out) const {
  out.u32(pool_size_);
  out.u32s(pools_);
  out.f64s(perms_);
}

SpatialPooler SpatialPooler::load(BinaryReader& in, const SpConfig& cfg) {
  SpatialPooler sp(cfg);
  if (in.u32() != sp.pool_size_) throw FormatError("spatial pooler pool size mismatch");
  auto pools = in.u32s();
  auto perms = in.f64s();
  if (pools.size() != sp.pools_.size() || perms.size() != sp.perms_.size()) {
    throw FormatError("spatial pooler state has wrong dimensions");
  }
  for (auto bit : pools) {
    if (bit >= cfg.input_width) throw FormatError("spatial pooler pool bit out of range");
  }
  for (auto p : perms) {
    if (!in_unit(p)) throw FormatError("spatial pooler permanence out of range");
  }
  sp.pools_ = std::move(pools);
  sp.perms_ = std::move(perms);
  sp.rebuild_all();
  return sp;
}

} // namespace seismic_htm
