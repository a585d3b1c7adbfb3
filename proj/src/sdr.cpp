#include "seismic_htm/sdr.hpp"

#include <algorithm>
#include <iterator>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

namespace {

void require_same_width(const Sdr& a, const Sdr& b) {
  if (a.width() != b.width()) {
    throw ContractViolation("SDR width mismatch: " + std::to_string(a.width()) +
                            " vs " + std::to_string(b.width()));
  }
}

} // namespace

Sdr::Sdr(Index width, std::vector<Index> active)
    : width_(width), active_(std::move(active)) {
  if (!std::is_sorted(active_.begin(), active_.end())) std::sort(active_.begin(), active_.end());
  if (std::adjacent_find(active_.begin(), active_.end()) != active_.end()) {
    throw ContractViolation("SDR active indices must be distinct");
  }
  if (!active_.empty() && active_.back() >= width_) {
    throw ContractViolation("SDR index " + std::to_string(active_.back()) +
                            " out of range for width " + std::to_string(width_));
  }
}

Sdr::Sdr(Index width, std::initializer_list<Index> active)
    : Sdr(width, std::vector<Index>(active)) {}

Sdr Sdr::range(Index width, Index first, Index count) {
  if (static_cast<std::uint64_t>(first) + count > width) {
    throw ContractViolation("SDR range exceeds width");
  }
  Sdr out(width);
  out.active_.resize(count);
  for (Index i = 0; i < count; ++i) out.active_[i] = first + i;
  return out;
}

bool Sdr::contains(Index bit) const noexcept {
  return std::binary_search(active_.begin(), active_.end(), bit);
}

std::string Sdr::to_string() const {
  std::string out = "width:" + std::to_string(width_) + " active:[";
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(active_[i]);
  }
  out += ']';
  return out;
}

std::size_t overlap(const Sdr& a, const Sdr& b) {
  require_same_width(a, b);
  auto ia = a.active().begin();
  auto ib = b.active().begin();
  std::size_t count = 0;
  while (ia != a.active().end() && ib != b.active().end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

Sdr set_union(const Sdr& a, const Sdr& b) {
  require_same_width(a, b);
  std::vector<Sdr::Index> merged;
  merged.reserve(a.size() + b.size());
  std::set_union(a.active().begin(), a.active().end(), b.active().begin(),
                 b.active().end(), std::back_inserter(merged));
  return Sdr(a.width(), std::move(merged));
}

bool is_subset(const Sdr& sub, const Sdr& super) {
  require_same_width(sub, super);
  return std::includes(super.active().begin(), super.active().end(),
                       sub.active().begin(), sub.active().end());
}

} // namespace seismic_htm
