#include "gachaos/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace gachaos;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference outputs published with the Random123 distribution (kat_vectors).
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter addressing is a pure function of its coordinates") {
  const CounterRng a(42, 7, 3);
  const CounterRng b(42, 7, 0);
  const auto slot = CounterRng::slot(Purpose::kStepDraws, 5);
  CHECK(a.uniform(11, slot) == b.at_step(3).uniform(11, slot));
  CHECK(a.uniform(11, slot) != a.uniform(12, slot));
  CHECK(a.uniform(11, slot) != CounterRng(43, 7, 3).uniform(11, slot));
  CHECK(a.uniform(11, slot) != CounterRng(42, 8, 3).uniform(11, slot));
  CHECK(a.uniform(11, slot) != a.uniform(11, CounterRng::slot(Purpose::kInitial, 5)));
}

TEST_CASE("slot tags keep purposes apart") {
  CHECK(CounterRng::slot(Purpose::kInitial, 0) != CounterRng::slot(Purpose::kStepDraws, 0));
  CHECK((CounterRng::slot(Purpose::kSuite, 0x123456) & 0xFFFFFF) == 0x123456u);
}

TEST_CASE("uniform and normal moments") {
  const CounterRng rng(2024, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(static_cast<std::uint32_t>(i), 0);
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    su2 += u * u;
    const double z = rng.normal(static_cast<std::uint32_t>(i), 1);
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(su2 / n - 1.0 / 3) < 4 * std::sqrt(4.0 / 45 / n));
  CHECK(std::abs(sn / n) < 4 * std::sqrt(1.0 / n));
  CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
  CHECK(std::abs(sn4 / n - 3.0) < 4 * std::sqrt(96.0 / n));
}

TEST_CASE("sequential stream replays and stays in range") {
  SequentialRng a(5, 1), b(5, 1);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.uniform() == b.uniform());
    const auto k = a.uniform_int(3, 7);
    b.uniform_int(3, 7);
    CHECK(k >= 3);
    CHECK(k <= 7);
    seen.insert(k);
    CHECK(a.exponential() == b.exponential());
  }
  CHECK(seen.size() == 5);
}
