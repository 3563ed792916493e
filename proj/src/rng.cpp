#include "gachaos/rng.hpp"

#include <cmath>
#include <numbers>

namespace gachaos {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;  // 53 bits
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

CounterRng CounterRng::at_step(std::uint32_t step) const {
  CounterRng copy = *this;
  copy.step_ = step;
  return copy;
}

PhiloxBlock CounterRng::block(std::uint32_t particle, std::uint32_t slot) const {
  return philox4x32_10({particle, step_, stream_, slot}, key_);
}

double CounterRng::uniform(std::uint32_t particle, std::uint32_t slot) const {
  const PhiloxBlock b = block(particle, slot);
  return to_unit(b[0], b[1]);
}

double CounterRng::normal(std::uint32_t particle, std::uint32_t slot) const {
  const PhiloxBlock b = block(particle, slot);
  const double u1 = 1.0 - to_unit(b[0], b[1]);  // (0, 1]
  const double u2 = to_unit(b[2], b[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SequentialRng::uniform() {
  const auto c = counter_++;
  return rng_.at_step(static_cast<std::uint32_t>(c >> 24))
      .uniform(0, CounterRng::slot(purpose_, static_cast<std::uint32_t>(c)));
}

double SequentialRng::normal() {
  const auto c = counter_++;
  return rng_.at_step(static_cast<std::uint32_t>(c >> 24))
      .normal(0, CounterRng::slot(purpose_, static_cast<std::uint32_t>(c)));
}

std::int64_t SequentialRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const double span = static_cast<double>(hi - lo + 1);
  const auto k = static_cast<std::int64_t>(uniform() * span);
  return lo + (k > hi - lo ? hi - lo : k);
}

double SequentialRng::exponential() { return -std::log(1.0 - uniform()); }

}  // namespace gachaos
