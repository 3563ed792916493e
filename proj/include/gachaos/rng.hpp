#pragma once

#include <array>
#include <cstdint>

namespace gachaos {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key);

/// Top-level tag stored in the upper byte of a slot so that unrelated
/// consumers of the same seed never address the same counter.
enum class Purpose : std::uint32_t {
  kInitial = 1,
  kStepDraws = 2,
  kReference = 3,
  kSuite = 4,
  kCouplingCheck = 5,
};

/// Addresses one independent family of streams: (seed, stream, step). Every
/// (particle, slot) pair inside it is a distinct counter, so values do not
/// depend on evaluation order or thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t stream, std::uint32_t step = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        step_(step) {}

  std::uint32_t stream() const { return stream_; }
  std::uint32_t step() const { return step_; }
  CounterRng at_step(std::uint32_t step) const;

  static std::uint32_t slot(Purpose purpose, std::uint32_t index) {
    return (static_cast<std::uint32_t>(purpose) << 24) | (index & 0x00FFFFFFu);
  }

  PhiloxBlock block(std::uint32_t particle, std::uint32_t slot) const;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint32_t particle, std::uint32_t slot) const;

  /// Standard normal via Box-Muller on one block.
  double normal(std::uint32_t particle, std::uint32_t slot) const;

 private:
  PhiloxKey key_;
  std::uint32_t stream_;
  std::uint32_t step_;
};

/// Sequential view over a counter stream, for code that just wants "the
/// next number" (suites, random instance generators).
class SequentialRng {
 public:
  SequentialRng(std::uint64_t seed, std::uint32_t stream, Purpose purpose = Purpose::kSuite)
      : rng_(seed, stream), purpose_(purpose) {}

  double uniform();
  double normal();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double exponential();

 private:
  CounterRng rng_;
  Purpose purpose_;
  std::uint64_t counter_ = 0;
};

}  // namespace gachaos
