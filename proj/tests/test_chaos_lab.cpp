#include "gachaos/chaos_lab.hpp"
#include "gachaos/report.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gachaos;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.fitness = FitnessSpec::gaussian_bump(1, 2, 1);
  c.sigma = 0.25;
  c.tau = 0.1;
  c.horizon = 1.0;
  c.n_list = {32, 64, 128};
  c.replicas = 4;
  c.grid_cells = 512;
  c.trace_cells = 256;
  c.seed = 7;
  c.threads = 1;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config helpers") {
  auto c = small_config();
  CHECK(c.n_max() == 10);
  CHECK(c.snapshot_stride() == 1);
  CHECK(c.snapshot_steps().back() == 10);
  c.horizon = 30.0;
  CHECK(c.snapshot_stride() == 5);
  CHECK(c.snapshot_steps().back() == 300);
  c.horizon = 30.05;
  CHECK(c.snapshot_steps().back() == c.n_max());
  CHECK(c.population_for_trace() == 32);

  auto bad = small_config();
  bad.n_list = {64, 32};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = small_config();
  bad.dim = 2;
  bad.fitness = FitnessSpec::constant(1.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // grid reference needs d = 1
  CHECK(parse_reference_kind("ensemble") == ReferenceKind::kEnsemble);
  CHECK_THROWS_AS(parse_reference_kind("mesh"), std::invalid_argument);
}

TEST_CASE("coupled trace examples") {
  SUBCASE("bound and zero start") {
    const auto t = coupled_error_trace(small_config());
    CHECK(t.initial_zero);
    CHECK(t.coupling_bound);
    CHECK(t.rows.size() == 11);
    CHECK(t.rows[0].e_n == 0.0);
    CHECK(t.checks == 4 * 11);
    for (const auto& r : t.rows) CHECK(r.bl_emp <= r.e_n + 1e-12);
  }
  SUBCASE("frozen point mass never separates") {
    auto c = small_config();
    c.sigma = 0.0;
    c.initial = InitialLaw{InitialLaw::Kind::kDirac, 0.0, 0.0};
    const auto t = coupled_error_trace(c);
    for (const auto& r : t.rows) {
      CHECK(r.e_n == 0.0);
      CHECK(r.bl_emp == 0.0);
    }
  }
  SUBCASE("ensemble reference in two dimensions") {
    auto c = small_config();
    c.dim = 2;
    c.fitness = FitnessSpec::gaussian_bump(1, 2, 1, Eigen::VectorXd::Zero(2));
    c.reference = ReferenceKind::kEnsemble;
    const auto t = coupled_error_trace(c);
    CHECK(t.initial_zero);
    CHECK(t.coupling_bound);
  }
}

TEST_CASE("rate in N is independent of the thread count") {
  auto c = small_config();
  const auto a = rate_in_n_experiment(c);
  c.threads = 3;
  const auto b = rate_in_n_experiment(c);
  CHECK(rate_table_csv(a) == rate_table_csv(b));
  CHECK(a.rows.size() == 3);
  CHECK(a.target_slope == -0.5);
  CHECK(a.moments.trajectories == 3 * 4 + 1);  // plus the reference
  CHECK(a.moments.ok());
  CHECK(std::isnan(a.rows[0].slope_running));
  CHECK(a.rows[2].slope_running == doctest::Approx(a.fit.slope).epsilon(1e-12));
  for (const auto& r : a.rows) {
    CHECK(r.mean_err > 0.0);
    CHECK(r.replicas == 4);
  }
}

TEST_CASE("standard error shrinks with replicas") {
  auto c = small_config();
  c.n_list = {64};
  c.replicas = 16;
  const double s16 = rate_in_n_experiment(c).rows[0].stderr_;
  c.replicas = 64;
  const double s64 = rate_in_n_experiment(c).rows[0].stderr_;
  // expected ratio 1/2
  CHECK(s64 / s16 > 0.3);
  CHECK(s64 / s16 < 0.8);
}

TEST_CASE("rate in tau validates nesting") {
  auto c = small_config();
  c.tau_list = {0.2, 0.1};
  c.tau_ref = 0.025;
  c.horizon = 1.0;
  const auto t = rate_in_tau_experiment(c);
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[0].param == 0.2);
  CHECK(t.rows[0].mean_err > t.rows[1].mean_err);
  c.tau_list = {0.2, 0.15};
  CHECK_THROWS_AS(rate_in_tau_experiment(c), std::invalid_argument);
  c.tau_list = {0.2, 0.1};
  c.tau_ref = 0.03;
  CHECK_THROWS_AS(rate_in_tau_experiment(c), std::invalid_argument);
}

TEST_CASE("stability suites") {
  for (const auto& f : {FitnessSpec::constant(1.0), FitnessSpec::gaussian_bump(1, 2, 1),
                        FitnessSpec::reciprocal_rastrigin(0.5, 2)}) {
    const int dim = f.kind() == FitnessKind::kReciprocalRastrigin ? 2 : 1;
    const auto r = selection_stability_suite(f, dim, 100, 4);
    CHECK(r.passed());
    CHECK(r.cases == 200);
    CHECK(r.max_ratio <= r.bound * (1 + 1e-12));
  }
  const auto x = crossover_lipschitz_suite({1, 2, 5}, 500, 5);
  CHECK(x.passed());
  CHECK(x.cases == 1500);
  CHECK(x.bound == 1.0);
}

TEST_CASE("report output") {
  const auto dir = std::filesystem::temp_directory_path() / "gachaos_report_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  RateTable empty;
  empty.name = "empty";
  const auto files = emit_rate_table(dir, empty);
  CHECK(files.size() == 1);
  CHECK(slurp(dir / "empty.csv") == "param,mean_err,stderr,epsilon,slope_running\n");
  CHECK_FALSE(std::filesystem::exists(dir / "empty.svg"));

  RateTable six;
  six.name = "six";
  for (int k = 0; k < 6; ++k) six.rows.push_back(RateRow{std::pow(2.0, 5 + k), std::pow(2.0, -k / 2.0), 0.01, 0, 4, 0});
  six.fit = SlopeFit{-0.5, 0.0, 0.0, -0.5, -0.5, 6};
  CHECK(emit_rate_table(dir, six).size() == 2);
  const auto csv = slurp(dir / "six.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(slurp(dir / "six.svg").find("<svg") != std::string::npos);
  const auto first = slurp(dir / "six.svg");
  emit_rate_table(dir, six);
  CHECK(slurp(dir / "six.svg") == first);
  CHECK(slurp(dir / "six.csv") == csv);

  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "x.csv", "a"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
