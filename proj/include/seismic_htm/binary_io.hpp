#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

/// Little-endian byte sink used by the checkpoint format. Every value is
/// written with an explicit width so files are identical across platforms.
class BinaryWriter {
public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void str(const std::string& s) {
    u64(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void u32s(const std::vector<std::uint32_t>& v) {
    u64(v.size());
    for (auto x : v) u32(x);
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    for (auto x : v) f64(x);
  }

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader over a byte buffer; any overrun throws FormatError.
class BinaryReader {
public:
  BinaryReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool boolean() {
    const auto v = u8();
    if (v > 1) throw FormatError("corrupt boolean in checkpoint");
    return v == 1;
  }
  std::string str() {
    const auto n = count(1);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<std::uint32_t> u32s() {
    const auto n = count(4);
    std::vector<std::uint32_t> v(n);
    for (auto& x : v) x = u32();
    return v;
  }
  std::vector<double> f64s() {
    const auto n = count(8);
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }

  /// Reads an element count and checks that at least `elem_size` bytes per
  /// element remain, so corrupt counts cannot trigger huge allocations.
  std::size_t count(std::size_t elem_size) {
    const auto n = u64();
    if (elem_size != 0 && n > (size_ - pos_) / elem_size) {
      throw FormatError("corrupt length field in checkpoint");
    }
    return static_cast<std::size_t>(n);
  }

  bool at_end() const noexcept { return pos_ == size_; }

private:
  void need(std::size_t n) const {
    if (size_ - pos_ < n) throw FormatError("checkpoint truncated");
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

} // namespace seismic_htm
