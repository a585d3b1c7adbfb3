#include "seismic_htm/random.hpp"

#include <sstream>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

namespace {
__extension__ typedef unsigned __int128 U128;
} // namespace

double Random::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Random::below(std::uint64_t n) {
  if (n == 0) throw ContractViolation("Random::below requires n > 0");
  U128 m = static_cast<U128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<U128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::string Random::state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Random::set_state(const std::string& state) {
  std::istringstream in(state);
  std::mt19937_64 engine;
  in >> engine;
  if (in.fail()) throw FormatError("corrupt random generator state");
  engine_ = engine;
}

} // namespace seismic_htm
