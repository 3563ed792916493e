#include "gachaos/coupling.hpp"
#include "gachaos/meanfield.hpp"
#include "gachaos/rng.hpp"
#include "gachaos/transport.hpp"

#include <doctest.h>

#include <cmath>

using namespace gachaos;

namespace {

const FitnessSpec kFlat = FitnessSpec::constant(1.0);

GridDensity1D normal_on(double lo, double hi, std::size_t cells, double sd = 1.0) {
  return discretize_initial(InitialLaw{InitialLaw::Kind::kNormal, 0.0, sd}, GridSpec{lo, hi, cells});
}

GridDensity1D point_mass(std::size_t cells) {
  return discretize_initial(InitialLaw{InitialLaw::Kind::kDirac, 0.0, 0.0},
                            adaptive_grid(InitialLaw{InitialLaw::Kind::kDirac, 0.0, 0.0}, 0.0, 0.5, 10, cells));
}

// Nonlinear system with i.i.d. parents from the reweighted grid law.
Eigen::RowVectorXd ensemble_steps(const std::vector<GridDensity1D>& grid_traj, const FitnessSpec& f, double tau,
                                  double sigma, std::size_t m, std::size_t steps, std::uint64_t seed) {
  ReferenceEnsemble e{0, sample_initial(InitialLaw{}, 1, m, seed, 0)};
  for (std::size_t n = 0; n < steps; ++n) {
    const ReferenceSampler parents(reweight_by_fitness(grid_traj[n].to_measure(), f), m);
    e = nonlinear_step_ensemble(e, draws_at(seed, 0, static_cast<std::uint32_t>(n), m, 1, tau), parents, sigma);
  }
  return e.particles.row(0);
}

}  // namespace

TEST_CASE("Gauss-Legendre nodes on [0, 1]") {
  for (int n : {1, 2, 5, 16, 64}) {
    const auto [x, w] = gauss_legendre_unit(n);
    CHECK(x.size() == static_cast<std::size_t>(n));
    double total = 0.0;
    for (double v : w) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    // exact for degree 2n - 1: int_0^1 t^k dt = 1 / (k + 1)
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(gauss_legendre_unit(0), std::invalid_argument);
}

TEST_CASE("initial discretization") {
  const auto f = normal_on(-8, 8, 1000);
  CHECK(f.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(f.mean()) < 1e-12);
  const double h = 16.0 / 1000;
  CHECK(f.variance() == doctest::Approx(1.0 + h * h / 12).epsilon(1e-6));
  const auto d = point_mass(101);
  CHECK(d.masses().maxCoeff() == 1.0);
  CHECK(d.mean() == 0.0);
  const auto u = discretize_initial(InitialLaw{InitialLaw::Kind::kUniform, 0.0, 1.0}, GridSpec{-2, 2, 8});
  CHECK(u.masses()(2) == doctest::Approx(0.25));
  CHECK(u.masses()(0) == 0.0);
  CHECK(u.cdf(0.0) == doctest::Approx(0.5));
}

TEST_CASE("adaptive grid keeps the centre on a midpoint") {
  for (std::size_t cells : {7u, 8u, 512u}) {
    const auto g = adaptive_grid(InitialLaw{InitialLaw::Kind::kNormal, 0.3, 1.0}, 0.25, 0.1, 20, cells);
    CHECK(g.midpoint(cells / 2) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(g.lo <= 0.3 - 8.0);
    CHECK(g.hi >= 0.3 + 8.0);
  }
}

TEST_CASE("gain operator examples") {
  SUBCASE("point mass is a fixed point of crossover") {
    const auto d = point_mass(101);
    const auto out = gain_apply_1d(d, FitnessSpec::gaussian_bump(1, 2, 1), 0.0);
    CHECK((out.masses() - d.masses()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((out.masses().array() > 0.0).count() == 1);
  }
  SUBCASE("mean and variance under constant fitness") {
    const auto f = normal_on(-10, 10, 2048);
    const double sigma = 0.25;
    const auto out = gain_apply_1d(f, kFlat, sigma);
    CHECK(std::abs(out.mean() - f.mean()) < 1e-6);
    CHECK(std::abs(out.variance() - (2.0 / 3.0 * f.variance() + sigma * sigma)) < 1e-4);
    CHECK(out.total_mass() >= (1.0 - 1e-6) * f.total_mass());
  }
  SUBCASE("16 nodes agree with 64 nodes") {
    const auto f = normal_on(-10, 10, 1024);
    const auto fit = FitnessSpec::gaussian_bump(1, 2, 1);
    const auto a = gain_apply_1d(f, fit, 0.25, GainOptions{16, 8.0});
    const auto b = gain_apply_1d(f, fit, 0.25, GainOptions{64, 8.0});
    CHECK((a.masses() - b.masses()).cwiseAbs().sum() < 1e-6);
  }
  SUBCASE("grid too coarse for the kernel") {
    const auto f = normal_on(-10, 10, 64);
    CHECK_THROWS_AS(gain_apply_1d(f, kFlat, 0.25), std::invalid_argument);
  }
}

TEST_CASE("Euler step examples") {
  const auto f = normal_on(-10, 10, 1024);
  const auto fit = FitnessSpec::gaussian_bump(1, 2, 1);
  CHECK(euler_step_grid(f, 1.0, fit, 0.3).masses() == gain_apply_1d(f, fit, 0.3).masses());
  const auto d = point_mass(101);
  CHECK(euler_step_grid(d, 0.5, fit, 0.0).masses() == d.masses());
  const auto next = euler_step_grid(f, 0.2, fit, 0.3);
  CHECK(next.total_mass() >= (1.0 - 1e-6) * f.total_mass());
  CHECK_THROWS_AS(euler_step_grid(f, 0.0, fit, 0.3), std::invalid_argument);
}

TEST_CASE("constant fitness: mean invariance and variance recursion") {
  const double tau = 0.2, sigma = 0.3;
  const auto traj = grid_trajectory(normal_on(-12, 12, 2048), tau, kFlat, sigma, 15);
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    CHECK(std::abs(traj[n + 1].mean() - traj[n].mean()) < 1e-6);
    const double v = traj[n].variance();
    CHECK(std::abs(traj[n + 1].variance() - ((1 - tau / 3) * v + tau * sigma * sigma)) < 1e-4);
    CHECK(traj[n + 1].total_mass() >= (1.0 - 1e-6) * traj[n].total_mass());
  }
}

TEST_CASE("refinement consistency") {
  const auto fit = FitnessSpec::gaussian_bump(1, 2, 1);
  const auto law = InitialLaw{};
  std::vector<Measure> out;
  for (std::size_t cells : {256u, 512u, 1024u, 2048u}) {
    const auto g = adaptive_grid(law, 0.25, 0.1, 10, cells);
    out.push_back(grid_trajectory(discretize_initial(law, g), 0.1, fit, 0.25, 10).back().to_measure());
  }
  const double d1 = bl_distance(out[0], out[1]);
  const double d2 = bl_distance(out[1], out[2]);
  const double d3 = bl_distance(out[2], out[3]);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
  CHECK(d3 < 2.0 * d2);
}

TEST_CASE("nonlinear step examples") {
  Eigen::MatrixXd x(1, 4);
  x << -1, 0, 2, 5;
  const ReferenceEnsemble e{3, x};
  auto d = draws_at(1, 0, 0, 4, 1, 0.5);
  std::fill(d.gate.begin(), d.gate.end(), 0);
  const ReferenceSampler zero(uniform_empirical({Point::Zero(1)}), 4);
  const auto same = nonlinear_step_ensemble(e, d, zero, 0.7);
  CHECK(same.particles == x);
  CHECK(same.step == 4);

  std::fill(d.gate.begin(), d.gate.end(), 1);
  CHECK(nonlinear_step_ensemble(e, d, zero, 0.0).particles.isZero(0.0));

  const auto wrong = draws_at(1, 0, 0, 5, 1, 0.5);
  CHECK_THROWS_AS(nonlinear_step_ensemble(e, wrong, zero, 0.0), std::invalid_argument);
}

TEST_CASE("ensemble against grid: one step and ten steps") {
  const auto fit = FitnessSpec::gaussian_bump(1, 2, 1);
  const double tau = 0.5, sigma = 0.25;
  const auto law = InitialLaw{};
  const auto g = adaptive_grid(law, sigma, tau, 10, 2048);
  const auto traj = grid_trajectory(discretize_initial(law, g), tau, fit, sigma, 10);
  const std::size_t m = 100000;
  CHECK(ks_distance(ensemble_steps(traj, fit, tau, sigma, m, 1, 5), traj[1]) < 0.01);
  CHECK(ks_distance(ensemble_steps(traj, fit, tau, sigma, m, 10, 6), traj[10]) < 0.02);
}

TEST_CASE("ks_distance") {
  const auto u = discretize_initial(InitialLaw{InitialLaw::Kind::kUniform, 0.5, 0.5}, GridSpec{0, 1, 10});
  Eigen::RowVectorXd s(1000);
  for (int k = 0; k < 1000; ++k) s(k) = (k + 0.5) / 1000;
  CHECK(ks_distance(s, u) <= 0.0005 + 1e-12);
  CHECK(ks_distance(Eigen::RowVectorXd::Zero(10), u) == doctest::Approx(1.0));
}

TEST_CASE("gaussian norm moments") {
  CHECK(gaussian_norm_moment(2, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_norm_moment(2, 5) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(gaussian_norm_moment(4, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gaussian_norm_moment(4, 3) == doctest::Approx(15.0).epsilon(1e-14));  // d(d + 2)
  CHECK(gaussian_norm_moment(1, 1) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-14));
}

TEST_CASE("moment bound check") {
  const auto bump = FitnessSpec::gaussian_bump(1, 2, 1).constants();
  SUBCASE("frozen point mass") {
    const auto traj = grid_trajectory(point_mass(101), 0.5, kFlat, 0.0, 20);
    std::vector<double> mq;
    for (const auto& f : traj) mq.push_back(f.moment(3.0));
    for (double v : mq) CHECK(v == 0.0);
    const auto r = moment_bound_check(mq, 3.0, kFlat.constants(), 0.0, 0.5, 1);
    CHECK(r.ok());
  }
  SUBCASE("constant fitness second moment tends to 3 sigma^2") {
    const double sigma = 0.1;
    const auto traj = grid_trajectory(normal_on(-6, 6, 4096), 1.0, kFlat, sigma, 60);
    std::vector<double> mq;
    for (const auto& f : traj) mq.push_back(f.moment(2.0));
    CHECK(std::abs(mq.back() / (3 * sigma * sigma) - 1.0) < 0.02);
    CHECK(moment_bound_check(mq, 2.0, kFlat.constants(), sigma, 1.0, 1).ok());
  }
  SUBCASE("envelope on a selective run") {
    const auto fit = FitnessSpec::gaussian_bump(1, 2, 1);
    const auto law = InitialLaw{InitialLaw::Kind::kNormal, 3.0, 1.0};
    const auto g = adaptive_grid(law, 0.5, 0.1, 30, 1024);
    const auto traj = grid_trajectory(discretize_initial(law, g), 0.1, fit, 0.5, 30);
    std::vector<double> mq;
    for (const auto& f : traj) mq.push_back(f.moment(4.0));
    const auto r = moment_bound_check(mq, 4.0, bump, 0.5, 0.1, 1);
    CHECK(r.ok());
    CHECK(r.constant == doctest::Approx(27.0 * 3.0));  // 3^{q-1} max(2, E xi^4)
    for (std::size_t n = 0; n < mq.size(); ++n) {
      CHECK(std::isfinite(r.root[n]));
      CHECK(r.mq[n] <= r.envelope[n]);
      CHECK(r.envelope[n] <= r.exp_envelope[n] * (1 + 1e-12));
    }
  }
  SUBCASE("a jump past the recursion is flagged") {
    const auto r = moment_bound_check({1.0, 100.0}, 2.0, kFlat.constants(), 0.1, 0.1, 1);
    CHECK_FALSE(r.one_step_ok);
    CHECK_FALSE(r.envelope_ok);
  }
}
