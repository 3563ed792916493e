#pragma once

#include "gachaos/fitness.hpp"
#include "gachaos/ga_engine.hpp"
#include "gachaos/meanfield.hpp"
#include "gachaos/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gachaos {

enum class ReferenceKind { kGrid, kEnsemble };

std::string to_string(ReferenceKind kind);
ReferenceKind parse_reference_kind(const std::string& name);

struct ExperimentConfig {
  FitnessSpec fitness = FitnessSpec::constant(1.0);
  int dim = 1;
  double sigma = 0.0;
  double tau = 0.1;
  double horizon = 1.0;  // T
  InitialLaw initial;

  std::vector<std::size_t> n_list;
  std::size_t replicas = 10;
  ReferenceKind reference = ReferenceKind::kGrid;
  std::size_t grid_cells = 2048;
  std::size_t ensemble_factor = 100;  // M = factor * max N for d >= 2

  std::vector<double> tau_list;
  double tau_ref = 0.0;     // 0: smallest listed tau / 8
  std::size_t trace_n = 0;  // 0: first entry of n_list
  std::size_t trace_cells = 512;
  double moment_q = 2.0;

  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: machine parallelism

  std::size_t n_max() const;
  /// Snapshot stride for sup over t_n <= T: 1 up to 200 steps, else 5.
  std::size_t snapshot_stride() const;
  /// Steps 0, stride, 2 stride, ..., always ending at n_max.
  std::vector<std::size_t> snapshot_steps() const;
  std::size_t population_for_trace() const;
  SimParams sim_params(std::size_t n) const;
  void validate() const;
};

struct MomentSummary {
  std::size_t trajectories = 0;
  std::size_t failures = 0;
  double constant = 0.0;
  double max_required_constant = 0.0;
  double max_root = 0.0;  // largest M_q^{1/q} seen
  bool ok() const { return failures == 0; }
  void add(const MomentEnvelopeReport& report);
};

struct RateRow {
  double param = 0.0;  // N or tau
  double mean_err = 0.0;
  double stderr_ = 0.0;
  double epsilon = 0.0;  // epsilon_1(N) or tau
  std::size_t replicas = 0;
  double slope_running = 0.0;  // fit through this and all previous rows; NaN for the first
};

struct RateTable {
  std::string name;
  std::vector<RateRow> rows;
  SlopeFit fit;
  std::size_t fit_first_row = 0;  // rows before this were excluded from the fit
  double target_slope = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool insufficient_replicas = false;
  bool monotone = true;  // mean errors nonincreasing up to 2 standard errors
  double reference_error = 0.0;  // epsilon_1(M) for ensemble references, else 0
  std::size_t snapshot_stride = 1;
  MomentSummary moments;

  bool slope_in_band() const { return fit.slope >= band_lo && fit.slope <= band_hi; }
};

/// Grid reference trajectory f_0..f_{n_max} of the Euler scheme at the
/// configured tau (d = 1).
std::vector<GridDensity1D> reference_grid(const ExperimentConfig& config, std::size_t cells);

/// sup over snapshot steps of ||f^N_n - f_n||_BL, averaged over replicas, for
/// every N in the list; log-log slope against N.
RateTable rate_in_n_experiment(const ExperimentConfig& config);

/// sup over shared times of ||f^tau_n - f^ref(t_n)||_BL for each tau in the
/// list, against a nested finer reference step; log-log slope against tau.
RateTable rate_in_tau_experiment(const ExperimentConfig& config);

struct TraceRow {
  std::size_t step = 0;
  double e_n = 0.0;     // mean over replicas of (1/N) sum_i D(X^i_n, Xbar^i_n)
  double bl_emp = 0.0;  // mean over replicas of ||f^N_n - fbar^N_n||_BL
  double e_n_stderr = 0.0;
  double bl_stderr = 0.0;
};

struct CoupledTrace {
  std::size_t population = 0;
  std::size_t replicas = 0;
  std::vector<TraceRow> rows;
  bool initial_zero = true;     // E_0 = 0 in every replica
  bool coupling_bound = true;   // bl_emp <= E_n at every step of every replica
  double max_bound_excess = 0.0;
  std::size_t checks = 0;
};

/// Runs the GA and the nonlinear system on shared draws. Parents of the
/// nonlinear system come from the optimal coupling between the reweighted
/// reference f~_n and mu_{X_n, w_n}.
CoupledTrace coupled_error_trace(const ExperimentConfig& config);

struct SuiteReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // lhs / rhs over cases with rhs > 0
  double bound = 0.0;      // C_F for selection, 1 for crossover
  bool passed() const { return violations == 0; }
};

/// W1^(F f / <F,f>, F g / <F,g>) <= C_F W1^(f, g) on n_cases random pairs of
/// small measures in dimension `dim`, plus n_cases perturbed pairs g ~ f.
SuiteReport selection_stability_suite(const FitnessSpec& fitness, int dim, std::size_t n_cases,
                                      std::uint64_t seed);

/// D(x', y') <= D(x, y) + D(x_*, y_*) for offspring built from shared
/// (gamma, sigma xi), n_cases tuples in each dimension.
SuiteReport crossover_lipschitz_suite(const std::vector<int>& dims, std::size_t n_cases, std::uint64_t seed);

/// Random measure with 1..max_atoms atoms, positions N(0, scale^2 I),
/// Dirichlet(1) weights.
Measure random_small_measure(SequentialRng& rng, int dim, int max_atoms = 10, double scale = 3.0);

struct GaSummaryRow {
  std::size_t step = 0;
  Eigen::VectorXd mean;
  double m2 = 0.0;
  double mq = 0.0;
  double best_fitness = 0.0;
};

GaSummaryRow summarize(const PopulationState& state, const FitnessSpec& fitness, double q);

}  // namespace gachaos
