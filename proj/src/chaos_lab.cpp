#include "gachaos/chaos_lab.hpp"

#include "gachaos/coupling.hpp"
#include "gachaos/parallel.hpp"
#include "gachaos/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gachaos {

namespace {

constexpr std::uint32_t kEnsembleStream = 0x7FFF0000u;
constexpr std::uint32_t kTraceStream = 0x80000000u;
constexpr std::uint32_t kTraceEnsembleStream = 0xC0000000u;
constexpr double kBoundSlack = 1e-12;

double moment_of(const Eigen::MatrixXd& positions, double q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < positions.cols(); ++i) s += std::pow(positions.col(i).norm(), q);
  return s / static_cast<double>(positions.cols());
}

std::vector<double> trajectory_moments(const Trajectory& traj, double q) {
  std::vector<double> mq;
  mq.reserve(traj.states.size());
  for (const auto& s : traj.states) mq.push_back(moment_of(s.positions, q));
  return mq;
}

std::vector<double> grid_moments(const std::vector<GridDensity1D>& traj, double q) {
  std::vector<double> mq;
  mq.reserve(traj.size());
  for (const auto& f : traj) mq.push_back(f.moment(q));
  return mq;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

void finish_table(RateTable& table) {
  auto& rows = table.rows;
  if (rows.size() > 2 && rows[0].stderr_ > 0.25 * rows[0].mean_err) table.fit_first_row = 1;
  std::vector<double> x, y;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].slope_running = nan();
    if (k < table.fit_first_row) continue;
    if (rows[k].mean_err > 0.0) {
      x.push_back(rows[k].param);
      y.push_back(rows[k].mean_err);
    }
    if (x.size() >= 2) rows[k].slope_running = fit_loglog(x, y).slope;
  }
  if (x.size() >= 2) table.fit = fit_loglog(x, y);
  else table.fit.slope = nan();
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double gap = std::abs(rows[k].mean_err - rows[k + 1].mean_err);
    if (rows[k].stderr_ > 0.5 * gap || rows[k + 1].stderr_ > 0.5 * gap) table.insufficient_replicas = true;
    if (rows[k + 1].mean_err > rows[k].mean_err + 2.0 * std::max(rows[k].stderr_, rows[k + 1].stderr_))
      table.monotone = false;
  }
}

}  // namespace

std::string to_string(ReferenceKind kind) { return kind == ReferenceKind::kGrid ? "grid" : "ensemble"; }

ReferenceKind parse_reference_kind(const std::string& name) {
  if (name == "grid") return ReferenceKind::kGrid;
  if (name == "ensemble") return ReferenceKind::kEnsemble;
  throw std::invalid_argument("unknown reference kind '" + name + "' (expected grid or ensemble)");
}

std::size_t ExperimentConfig::n_max() const { return static_cast<std::size_t>(std::llround(horizon / tau)); }

std::size_t ExperimentConfig::snapshot_stride() const { return n_max() <= 200 ? 1 : 5; }

std::vector<std::size_t> ExperimentConfig::snapshot_steps() const {
  std::vector<std::size_t> steps;
  const auto last = n_max();
  for (std::size_t n = 0; n <= last; n += snapshot_stride()) steps.push_back(n);
  if (steps.back() != last) steps.push_back(last);
  return steps;
}

std::size_t ExperimentConfig::population_for_trace() const {
  if (trace_n > 0) return trace_n;
  if (n_list.empty()) throw std::invalid_argument("config: n_list is empty and no trace_n given");
  return n_list.front();
}

SimParams ExperimentConfig::sim_params(std::size_t n) const {
  SimParams p;
  p.n_particles = n;
  p.tau = tau;
  p.sigma = sigma;
  p.n_max = n_max();
  p.dim = dim;
  p.seed = seed;
  return p;
}

void ExperimentConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim: must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma: must be >= 0");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau: must lie in (0, 1]");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("T: must be > 0");
  if (replicas < 1) throw std::invalid_argument("replicas: must be >= 1");
  if (replicas > 0xFFFF) throw std::invalid_argument("replicas: at most 65535");
  if (n_list.size() > 0x7FFF) throw std::invalid_argument("n_list: too many entries");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 1) throw std::invalid_argument("n_list: entries must be >= 1");
    if (k > 0 && n_list[k] == n_list[k - 1]) throw std::invalid_argument("n_list: duplicate entry");
    if (k > 0 && n_list[k] < n_list[k - 1]) throw std::invalid_argument("n_list: must be strictly increasing");
  }
  if (reference == ReferenceKind::kGrid && dim != 1)
    throw std::invalid_argument("reference: grid reference needs dim = 1");
  if (grid_cells < 2 || trace_cells < 2) throw std::invalid_argument("grid_cells: must be >= 2");
  if (ensemble_factor < 1) throw std::invalid_argument("ensemble_factor: must be >= 1");
  if (!(moment_q >= 1.0)) throw std::invalid_argument("moment_q: must be >= 1");
  for (double t : tau_list)
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("tau_list: entries must lie in (0, 1]");
  if (tau_ref < 0.0 || tau_ref > 1.0) throw std::invalid_argument("tau_ref: must lie in (0, 1] or be 0 (auto)");
  if (fitness.kind() == FitnessKind::kReciprocalRastrigin && fitness.dim() != dim)
    throw std::invalid_argument("fitness: rastrigin dimension differs from dim");
  if (fitness.kind() == FitnessKind::kGaussianBump && fitness.center().size() != 0 && fitness.center().size() != dim)
    throw std::invalid_argument("fitness: bump centre dimension differs from dim");
}

void MomentSummary::add(const MomentEnvelopeReport& report) {
  ++trajectories;
  if (!report.ok()) ++failures;
  constant = report.constant;
  max_required_constant = std::max(max_required_constant, report.max_required_constant);
  for (double r : report.root) max_root = std::max(max_root, r);
}

std::vector<GridDensity1D> reference_grid(const ExperimentConfig& config, std::size_t cells) {
  if (config.dim != 1) throw std::invalid_argument("grid reference needs dim = 1");
  const auto grid = adaptive_grid(config.initial, config.sigma, config.tau, config.n_max(), cells);
  return grid_trajectory(discretize_initial(config.initial, grid), config.tau, config.fitness, config.sigma,
                         config.n_max());
}

RateTable rate_in_n_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.n_list.empty()) throw std::invalid_argument("rate-n: n_list is empty");
  const auto steps = config.snapshot_steps();
  const auto& fc = config.fitness.constants();

  RateTable table;
  table.name = "rate_n";
  table.snapshot_stride = config.snapshot_stride();
  const int d = config.dim;
  table.target_slope = d == 2 ? -0.5 : (d == 1 ? -0.5 : -1.0 / d);
  table.band_lo = table.target_slope - 0.15;
  table.band_hi = table.target_slope + 0.15;

  std::vector<Measure> reference;
  if (config.reference == ReferenceKind::kGrid) {
    const auto traj = reference_grid(config, config.grid_cells);
    for (auto n : steps) reference.push_back(traj[n].to_measure());
    table.moments.add(moment_bound_check(grid_moments(traj, config.moment_q), config.moment_q, fc, config.sigma,
                                         config.tau, 1));
  } else {
    const std::size_t m = config.ensemble_factor * config.n_list.back();
    const auto traj = run(config.sim_params(m), config.fitness, config.initial, kEnsembleStream, false);
    for (auto n : steps) reference.push_back(traj.states[n].empirical());
    table.moments.add(moment_bound_check(trajectory_moments(traj, config.moment_q), config.moment_q, fc,
                                         config.sigma, config.tau, d));
    table.reference_error = concentration_rate(static_cast<long long>(m), d);
  }

  const std::size_t count = config.n_list.size() * config.replicas;
  std::vector<double> sup_err(count);
  std::vector<MomentEnvelopeReport> moments(count);
  parallel_for(count, config.threads, [&](std::size_t u) {
    const std::size_t k = u / config.replicas;
    const std::size_t r = u % config.replicas;
    const auto stream = static_cast<std::uint32_t>((k << 16) | r);
    const auto traj = run(config.sim_params(config.n_list[k]), config.fitness, config.initial, stream, false);
    double worst = 0.0;
    for (std::size_t s = 0; s < steps.size(); ++s)
      worst = std::max(worst, bl_distance(traj.states[steps[s]].empirical(), reference[s]));
    sup_err[u] = worst;
    moments[u] = moment_bound_check(trajectory_moments(traj, config.moment_q), config.moment_q, fc, config.sigma,
                                    config.tau, d);
  });
  for (const auto& m : moments) table.moments.add(m);

  for (std::size_t k = 0; k < config.n_list.size(); ++k) {
    std::vector<double> errs(sup_err.begin() + static_cast<std::ptrdiff_t>(k * config.replicas),
                             sup_err.begin() + static_cast<std::ptrdiff_t>((k + 1) * config.replicas));
    const auto ms = mean_stderr(errs);
    RateRow row;
    row.param = static_cast<double>(config.n_list[k]);
    row.mean_err = ms.mean;
    row.stderr_ = ms.stderr_;
    row.epsilon = concentration_rate(static_cast<long long>(config.n_list[k]), d);
    row.replicas = config.replicas;
    table.rows.push_back(row);
  }
  finish_table(table);
  return table;
}

RateTable rate_in_tau_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.dim != 1) throw std::invalid_argument("rate-tau: needs dim = 1 (grid solver)");
  if (config.tau_list.empty()) throw std::invalid_argument("rate-tau: tau_list is empty");
  std::vector<double> taus = config.tau_list;
  std::sort(taus.begin(), taus.end(), std::greater<>());
  const double coarse = taus.front();
  const double tau_ref = config.tau_ref > 0.0 ? config.tau_ref : taus.back() / 8.0;

  auto ratio_of = [](double big, double small, const char* what) {
    const double q = big / small;
    const double r = std::round(q);
    if (r < 1.0 || std::abs(q - r) > 1e-9 * q) throw std::invalid_argument(std::string("rate-tau: ") + what);
    return static_cast<std::size_t>(r);
  };
  for (std::size_t k = 0; k + 1 < taus.size(); ++k) {
    if (taus[k] == taus[k + 1]) throw std::invalid_argument("rate-tau: duplicate tau");
    ratio_of(taus[k], taus[k + 1], "tau grid is not nested");
  }
  if (!(tau_ref < taus.back())) throw std::invalid_argument("rate-tau: tau_ref must be finer than every listed tau");
  ratio_of(taus.back(), tau_ref, "tau_ref does not divide the finest tau");
  const std::size_t shared_steps = ratio_of(config.horizon, coarse, "T is not a multiple of the coarsest tau");

  std::vector<double> all = taus;
  all.push_back(tau_ref);
  const std::size_t cells = config.grid_cells;
  const auto grid = adaptive_grid(config.initial, config.sigma, tau_ref, ratio_of(config.horizon, tau_ref, "T"), cells);
  const auto f0 = discretize_initial(config.initial, grid);
  const auto& fc = config.fitness.constants();

  // Frames at the shared times k * coarse, k = 0..shared_steps.
  std::vector<std::vector<Measure>> frames(all.size());
  std::vector<MomentEnvelopeReport> moments(all.size());
  parallel_for(all.size(), config.threads, [&](std::size_t t) {
    const std::size_t per = ratio_of(coarse, all[t], "nesting");
    const auto traj = grid_trajectory(f0, all[t], config.fitness, config.sigma, shared_steps * per);
    for (std::size_t k = 0; k <= shared_steps; ++k) frames[t].push_back(traj[k * per].to_measure());
    moments[t] = moment_bound_check(grid_moments(traj, config.moment_q), config.moment_q, fc, config.sigma, all[t], 1);
  });

  RateTable table;
  table.name = "rate_tau";
  table.target_slope = 1.0;
  table.band_lo = 0.75;
  table.band_hi = 1.25;
  for (const auto& m : moments) table.moments.add(m);
  const auto& ref = frames.back();
  for (std::size_t t = 0; t < taus.size(); ++t) {
    double worst = 0.0;
    for (std::size_t k = 0; k <= shared_steps; ++k) worst = std::max(worst, bl_distance(frames[t][k], ref[k]));
    RateRow row;
    row.param = taus[t];
    row.mean_err = worst;
    row.epsilon = taus[t];
    row.replicas = 1;
    table.rows.push_back(row);
  }
  // Rows run from coarse to fine; the exclusion rule only concerns rate-n.
  table.fit_first_row = 0;
  std::vector<double> x, y;
  for (auto& row : table.rows) {
    row.slope_running = nan();
    if (row.mean_err > 0.0) {
      x.push_back(row.param);
      y.push_back(row.mean_err);
    }
    if (x.size() >= 2) row.slope_running = fit_loglog(x, y).slope;
  }
  if (x.size() >= 2) table.fit = fit_loglog(x, y);
  else table.fit.slope = nan();
  for (std::size_t k = 0; k + 1 < table.rows.size(); ++k)
    if (table.rows[k + 1].mean_err > table.rows[k].mean_err) table.monotone = false;
  return table;
}

CoupledTrace coupled_error_trace(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n = config.population_for_trace();
  const std::size_t steps = config.n_max();
  const auto params = config.sim_params(n);

  std::vector<Measure> reference;
  if (config.reference == ReferenceKind::kGrid) {
    for (const auto& f : reference_grid(config, config.trace_cells)) reference.push_back(f.to_measure());
  } else {
    const auto traj = run(config.sim_params(config.trace_cells), config.fitness, config.initial,
                          kTraceEnsembleStream, false);
    for (const auto& s : traj.states) reference.push_back(s.empirical());
  }

  struct ReplicaTrace {
    std::vector<double> e, bl;
    bool initial_zero = true;
    bool bound = true;
    double excess = 0.0;
  };
  std::vector<ReplicaTrace> out(config.replicas);
  parallel_for(config.replicas, config.threads, [&](std::size_t r) {
    const auto stream = kTraceStream | static_cast<std::uint32_t>(r);
    auto state = PopulationState::from_positions(
        sample_initial(config.initial, config.dim, n, config.seed, stream), config.fitness);
    ReferenceEnsemble bar{0, state.positions};
    DrawStream rng{config.seed, stream, 0};
    auto& tr = out[r];
    auto record = [&] {
      double e = 0.0;
      for (Eigen::Index i = 0; i < state.positions.cols(); ++i)
        e += truncated_cost(state.positions.col(i), bar.particles.col(i));
      e /= static_cast<double>(n);
      const double bl = bl_distance(state.empirical(), Measure::uniform(bar.particles));
      tr.e.push_back(e);
      tr.bl.push_back(bl);
      if (bl > e + kBoundSlack) tr.bound = false;
      tr.excess = std::max(tr.excess, bl - e);
    };
    record();
    tr.initial_zero = tr.e.front() == 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const auto draws = draw_auxiliaries(rng, params);
      const auto sampler = CouplingSampler::build(reweight_by_fitness(reference[s], config.fitness), state.positions,
                                                  state.weights, CostKind::kTruncated);
      bar = nonlinear_step_ensemble(bar, draws, sampler, config.sigma);
      state = ga_step(state, draws, config.fitness, params);
      record();
    }
  });

  CoupledTrace trace;
  trace.population = n;
  trace.replicas = config.replicas;
  trace.max_bound_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s <= steps; ++s) {
    std::vector<double> e, bl;
    for (const auto& tr : out) {
      e.push_back(tr.e[s]);
      bl.push_back(tr.bl[s]);
    }
    const auto me = mean_stderr(e);
    const auto mb = mean_stderr(bl);
    trace.rows.push_back({s, me.mean, mb.mean, me.stderr_, mb.stderr_});
  }
  for (const auto& tr : out) {
    trace.initial_zero = trace.initial_zero && tr.initial_zero;
    trace.coupling_bound = trace.coupling_bound && tr.bound;
    trace.max_bound_excess = std::max(trace.max_bound_excess, tr.excess);
    trace.checks += tr.e.size();
  }
  return trace;
}

Measure random_small_measure(SequentialRng& rng, int dim, int max_atoms, double scale) {
  const auto k = static_cast<Eigen::Index>(rng.uniform_int(1, max_atoms));
  Eigen::MatrixXd support(dim, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (int c = 0; c < dim; ++c) support(c, j) = scale * rng.normal();
  Eigen::VectorXd w(k);
  for (Eigen::Index j = 0; j < k; ++j) w(j) = rng.exponential();
  return Measure::from_masses(std::move(support), w);
}

SuiteReport selection_stability_suite(const FitnessSpec& fitness, int dim, std::size_t n_cases,
                                      std::uint64_t seed) {
  SuiteReport report;
  report.name = "selection_stability_" + to_string(fitness.kind());
  report.bound = c_f_constant(fitness);
  SequentialRng rng(seed, 0x5E1E0000u + static_cast<std::uint32_t>(dim));
  auto check = [&](const Measure& f, const Measure& g) {
    const double rhs = bl_distance(f, g);
    const double lhs = bl_distance(reweight_by_fitness(f, fitness), reweight_by_fitness(g, fitness));
    ++report.cases;
    if (lhs > report.bound * rhs + kBoundSlack) ++report.violations;
    if (rhs > 1e-14) report.max_ratio = std::max(report.max_ratio, lhs / rhs);
  };
  for (std::size_t c = 0; c < n_cases; ++c) {
    const auto f = random_small_measure(rng, dim);
    const auto g = random_small_measure(rng, dim);
    check(f, g);
  }
  // Nearby pairs: small moves of atoms and weights probe the ratio near 0/0.
  for (std::size_t c = 0; c < n_cases; ++c) {
    const auto f = random_small_measure(rng, dim);
    const double delta = std::pow(10.0, -3.0 + 3.0 * rng.uniform());
    Eigen::MatrixXd support = f.support();
    Eigen::VectorXd w = f.weights();
    for (Eigen::Index j = 0; j < support.cols(); ++j) {
      for (int k = 0; k < dim; ++k) support(k, j) += delta * rng.normal();
      w(j) *= std::exp(delta * rng.normal());
    }
    check(f, Measure::from_masses(std::move(support), w));
  }
  return report;
}

SuiteReport crossover_lipschitz_suite(const std::vector<int>& dims, std::size_t n_cases, std::uint64_t seed) {
  SuiteReport report;
  report.name = "crossover_lipschitz";
  report.bound = 1.0;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("crossover suite: dimensions must be >= 1");
    SequentialRng rng(seed, 0xC0550000u + static_cast<std::uint32_t>(d));
    auto normal_vec = [&] {
      Eigen::VectorXd v(d);
      for (int k = 0; k < d; ++k) v(k) = rng.normal();
      return v;
    };
    for (std::size_t c = 0; c < n_cases; ++c) {
      const Eigen::VectorXd x = 3.0 * normal_vec();
      const Eigen::VectorXd xs = 3.0 * normal_vec();
      const Eigen::VectorXd y = x + std::pow(10.0, -3.0 + 3.5 * rng.uniform()) * normal_vec();
      const Eigen::VectorXd ys = xs + std::pow(10.0, -3.0 + 3.5 * rng.uniform()) * normal_vec();
      Eigen::VectorXd gamma(d);
      for (int k = 0; k < d; ++k) gamma(k) = rng.uniform();
      const Eigen::VectorXd xi = normal_vec();
      const double sigma = 2.0 * rng.uniform();
      const double lhs = truncated_cost(crossover_mutation(x, xs, gamma, xi, sigma),
                                        crossover_mutation(y, ys, gamma, xi, sigma));
      const double rhs = truncated_cost(x, y) + truncated_cost(xs, ys);
      ++report.cases;
      if (lhs > rhs + kBoundSlack) ++report.violations;
      if (rhs > 0.0) report.max_ratio = std::max(report.max_ratio, lhs / rhs);
    }
  }
  return report;
}

GaSummaryRow summarize(const PopulationState& state, const FitnessSpec& fitness, double q) {
  GaSummaryRow row;
  row.step = state.step;
  row.mean = state.positions.rowwise().mean();
  row.m2 = moment_of(state.positions, 2.0);
  row.mq = moment_of(state.positions, q);
  row.best_fitness = fitness.eval_columns(state.positions).maxCoeff();
  return row;
}

}  // namespace gachaos
