#include "gachaos/fitness.hpp"
#include "gachaos/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace gachaos;

namespace {

Eigen::VectorXd random_point(SequentialRng& rng, int d, double lo, double hi) {
  Eigen::VectorXd x(d);
  for (int k = 0; k < d; ++k) x(k) = lo + (hi - lo) * rng.uniform();
  return x;
}

void check_constants(const FitnessSpec& f, int d, double lo, double hi, std::uint32_t stream) {
  const auto& c = f.constants();
  SequentialRng rng(101, stream);
  for (int t = 0; t < 10000; ++t) {
    const auto x = random_point(rng, d, lo, hi);
    // Half the pairs are close, which is where the slope is probed.
    const auto y = t % 2 ? random_point(rng, d, lo, hi)
                         : Eigen::VectorXd(x + 1e-3 * random_point(rng, d, -1.0, 1.0));
    const double fx = f(x), fy = f(y);
    CHECK(fx >= c.f_lo - 1e-12);
    CHECK(fx <= c.f_hi + 1e-12);
    CHECK(std::abs(fx - fy) <= c.lip * (x - y).norm() + 1e-12);
  }
}

}  // namespace

TEST_CASE("eval examples") {
  const auto one = FitnessSpec::constant(1.0);
  CHECK(one(Eigen::VectorXd::Constant(3, 7.0)) == 1.0);
  const auto bump = FitnessSpec::gaussian_bump(1.0, 2.0, 1.0);
  CHECK(bump(Eigen::VectorXd::Zero(1)) == 2.0);
  CHECK(std::abs(bump(Eigen::VectorXd::Constant(1, 100.0)) - 1.0) < 1e-12);
  Eigen::VectorXd c(2);
  c << 1.0, -1.0;
  const auto shifted = FitnessSpec::gaussian_bump(0.5, 4.0, 0.3, c);
  CHECK(shifted(c) == 4.0);
  CHECK_THROWS_AS(FitnessSpec::constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(FitnessSpec::gaussian_bump(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FitnessSpec::gaussian_bump(2.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FitnessSpec::reciprocal_rastrigin(1.5, 1), std::invalid_argument);
}

TEST_CASE("certified constants examples") {
  const auto one = FitnessSpec::constant(1.0).constants();
  CHECK(one.f_lo == 1.0);
  CHECK(one.f_hi == 1.0);
  CHECK(one.lip == 0.0);

  const auto bump = FitnessSpec::gaussian_bump(1.0, 2.0, 1.0);
  CHECK(bump.constants().lip == doctest::Approx(1.0 / std::sqrt(std::exp(1.0))).epsilon(1e-14));
  // Independent oracle: dense search of |F'| via central differences.
  double best = 0.0;
  for (int i = 1; i < 400000; ++i) {
    const double x = -8.0 + 16.0 * i / 400000.0, h = 1e-6;
    const double d = (bump(Eigen::VectorXd::Constant(1, x + h)) - bump(Eigen::VectorXd::Constant(1, x - h))) / (2 * h);
    best = std::max(best, std::abs(d));
  }
  CHECK(best == doctest::Approx(bump.constants().lip).epsilon(1e-6));

  const auto ras = FitnessSpec::reciprocal_rastrigin(0.2, 2);
  REQUIRE(ras.constants().box.has_value());
  CHECK(ras.constants().box->lo == -6.0);
  CHECK(ras.constants().box->hi == 6.0);
  CHECK(ras.constants().f_lo == 0.2);
  CHECK(ras.constants().f_hi == 1.0);
  CHECK(ras(Eigen::VectorXd::Zero(2)) == 1.0);
}

TEST_CASE("rastrigin gradient-ratio bound dominates a finite-difference scan") {
  const double bound = rastrigin_gradient_ratio_bound();
  double best = 0.0;
  for (int i = 0; i <= 600000; ++i) {
    const double t = -6.0 + 12.0 * i / 600000.0, h = 1e-7;
    auto g = [](double s) { return 1.0 / (1.0 + rastrigin(Eigen::VectorXd::Constant(1, s))); };
    best = std::max(best, std::abs(g(t + h) - g(t - h)) / (2 * h));
  }
  CHECK(best <= bound);
  CHECK(best >= bound / (1.0 + 1e-4));
}

TEST_CASE("bounds and Lipschitz constants hold on random pairs") {
  check_constants(FitnessSpec::constant(3.0), 2, -10, 10, 1);
  check_constants(FitnessSpec::gaussian_bump(1.0, 2.0, 1.0), 1, -10, 10, 2);
  check_constants(FitnessSpec::gaussian_bump(0.3, 5.0, 0.4), 3, -3, 3, 3);
  check_constants(FitnessSpec::reciprocal_rastrigin(0.5, 1), 1, -6, 6, 4);
  check_constants(FitnessSpec::reciprocal_rastrigin(0.1, 3), 3, -6, 6, 5);
  check_constants(FitnessSpec::reciprocal_rastrigin(0.1, 2), 2, -40, 40, 6);
}

TEST_CASE("selection-stability constant") {
  CHECK(c_f_constant(FitnessConstants{1.0, 2.0, 1.0, {}}) == doctest::Approx(15.0).epsilon(1e-15));
  CHECK(c_f_constant(FitnessSpec::constant(2.7)) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(c_f_constant(FitnessConstants{0.5, 1.0, 2.0, {}}) == doctest::Approx(24.0).epsilon(1e-15));

  double prev = 0.0;
  for (double lip = 0.0; lip <= 5.0; lip += 0.5) {
    const double v = c_f_constant(FitnessConstants{1.0, 2.0, lip, {}});
    CHECK(v >= prev);
    prev = v;
  }
  prev = 0.0;
  for (double hi = 1.0; hi <= 5.0; hi += 0.25) {
    const double v = c_f_constant(FitnessConstants{1.0, hi, 1.0, {}});
    CHECK(v >= prev);
    prev = v;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double lo = 0.1; lo <= 2.0; lo += 0.1) {
    const double v = c_f_constant(FitnessConstants{lo, 2.0, 1.0, {}});
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("kind names round trip") {
  for (auto k : {FitnessKind::kConstant, FitnessKind::kGaussianBump, FitnessKind::kReciprocalRastrigin})
    CHECK(parse_fitness_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_fitness_kind("sphere"), std::invalid_argument);
}
