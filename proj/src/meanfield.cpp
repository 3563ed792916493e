#include "gachaos/meanfield.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gachaos {

void GridSpec::validate() const {
  if (cells < 1) throw std::invalid_argument("grid: need at least one cell");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("grid: need lo < hi");
}

GridDensity1D::GridDensity1D(GridSpec grid, Eigen::VectorXd masses) : grid_(grid), masses_(std::move(masses)) {
  grid_.validate();
  if (static_cast<std::size_t>(masses_.size()) != grid_.cells)
    throw std::invalid_argument("grid density: mass count does not match cell count");
  if (!masses_.allFinite() || (masses_.array() < 0.0).any())
    throw std::invalid_argument("grid density: masses must be finite and nonnegative");
  if (!(masses_.sum() > 0.0)) throw std::invalid_argument("grid density: zero total mass");
}

double GridDensity1D::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < grid_.cells; ++k) s += masses_(static_cast<Eigen::Index>(k)) * grid_.midpoint(k);
  return s / total_mass();
}

double GridDensity1D::variance() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t k = 0; k < grid_.cells; ++k) {
    const double dx = grid_.midpoint(k) - m;
    s += masses_(static_cast<Eigen::Index>(k)) * dx * dx;
  }
  return s / total_mass();
}

double GridDensity1D::moment(double q) const {
  double s = 0.0;
  for (std::size_t k = 0; k < grid_.cells; ++k)
    s += masses_(static_cast<Eigen::Index>(k)) * std::pow(std::abs(grid_.midpoint(k)), q);
  return s / total_mass();
}

Measure GridDensity1D::to_measure() const {
  std::vector<Eigen::Index> nonzero;
  for (Eigen::Index k = 0; k < masses_.size(); ++k)
    if (masses_(k) > 0.0) nonzero.push_back(k);
  Eigen::MatrixXd support(1, static_cast<Eigen::Index>(nonzero.size()));
  Eigen::VectorXd w(support.cols());
  for (std::size_t t = 0; t < nonzero.size(); ++t) {
    support(0, static_cast<Eigen::Index>(t)) = grid_.midpoint(static_cast<std::size_t>(nonzero[t]));
    w(static_cast<Eigen::Index>(t)) = masses_(nonzero[t]);
  }
  return Measure::from_masses(std::move(support), w);
}

double GridDensity1D::cdf(double x) const {
  if (x <= grid_.lo) return 0.0;
  if (x >= grid_.hi) return 1.0;
  const double pos = (x - grid_.lo) / grid_.width();
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(pos), grid_.cells - 1);
  const double below = masses_.head(static_cast<Eigen::Index>(k)).sum();
  return (below + (pos - static_cast<double>(k)) * masses_(static_cast<Eigen::Index>(k))) / total_mass();
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

GridDensity1D discretize_initial(const InitialLaw& law, const GridSpec& grid) {
  grid.validate();
  const double h = grid.width();
  Eigen::VectorXd masses = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cells));
  switch (law.kind) {
    case InitialLaw::Kind::kNormal:
      if (!(law.spread > 0.0)) throw std::invalid_argument("initial law: normal spread must be > 0");
      for (std::size_t k = 0; k < grid.cells; ++k) {
        const double a = (grid.lo + h * static_cast<double>(k) - law.center) / law.spread;
        const double b = (grid.lo + h * static_cast<double>(k + 1) - law.center) / law.spread;
        // Difference of tails on the side that keeps precision.
        masses(static_cast<Eigen::Index>(k)) =
            a >= 0.0 ? normal_cdf(-a) - normal_cdf(-b) : normal_cdf(b) - normal_cdf(a);
      }
      break;
    case InitialLaw::Kind::kDirac: {
      if (law.center < grid.lo || law.center >= grid.hi) throw std::invalid_argument("initial law: point outside grid");
      const auto k = std::min<std::size_t>(static_cast<std::size_t>((law.center - grid.lo) / h), grid.cells - 1);
      masses(static_cast<Eigen::Index>(k)) = 1.0;
      break;
    }
    case InitialLaw::Kind::kUniform:
      if (!(law.spread > 0.0)) throw std::invalid_argument("initial law: uniform half-width must be > 0");
      for (std::size_t k = 0; k < grid.cells; ++k) {
        const double a = std::max(grid.lo + h * static_cast<double>(k), law.center - law.spread);
        const double b = std::min(grid.lo + h * static_cast<double>(k + 1), law.center + law.spread);
        if (b > a) masses(static_cast<Eigen::Index>(k)) = (b - a) / (2.0 * law.spread);
      }
      break;
  }
  return GridDensity1D(grid, std::move(masses));
}

GridSpec adaptive_grid(const InitialLaw& law, double sigma, double tau, std::size_t n_max, std::size_t cells) {
  if (cells < 1) throw std::invalid_argument("grid: need at least one cell");
  const auto [lo, hi] = law.bulk_interval();
  const double inflate = 12.0 * sigma * std::sqrt(std::max(1.0, static_cast<double>(n_max) * tau));
  const double half = std::max(0.5, std::max(law.center - lo, hi - law.center) + inflate);
  // The centre of the law sits on a cell midpoint, so a point mass stays exact.
  const double h = cells > 1 ? 2.0 * half / static_cast<double>(cells - 1) : 2.0 * half;
  GridSpec grid;
  grid.lo = law.center - (static_cast<double>(cells / 2) + 0.5) * h;
  grid.hi = grid.lo + static_cast<double>(cells) * h;
  grid.cells = cells;
  grid.validate();
  return grid;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre_unit(int nodes) {
  if (nodes < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  const auto half = boost::math::legendre_p_zeros<double>(nodes);  // nonnegative zeros
  std::vector<double> x, w;
  for (double z : half) {
    const double dp = boost::math::legendre_p_prime(nodes, z);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x.push_back(0.5 * (1.0 + z));
    w.push_back(0.5 * weight);
    if (z != 0.0) {
      x.push_back(0.5 * (1.0 - z));
      w.push_back(0.5 * weight);
    }
  }
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> xs, ws;
  for (auto i : order) {
    xs.push_back(x[i]);
    ws.push_back(w[i]);
  }
  return {xs, ws};
}

GridDensity1D gain_apply_1d(const GridDensity1D& f, const FitnessSpec& fitness, double sigma,
                            const GainOptions& options) {
  const GridSpec& grid = f.grid();
  const double h = grid.width();
  if (!(sigma >= 0.0)) throw std::invalid_argument("gain: sigma must be >= 0");
  if (sigma > 0.0 && h > 0.5 * sigma)
    throw std::invalid_argument("gain: grid too coarse (cell width must be <= sigma / 2)");
  const auto m = grid.cells;

  // Fitness-reweighted probabilities on the nonzero cells.
  std::vector<std::size_t> cells;
  std::vector<double> p;
  double norm = 0.0;
  Eigen::VectorXd point(1);
  for (std::size_t k = 0; k < m; ++k) {
    const double mass = f.masses()(static_cast<Eigen::Index>(k));
    if (mass <= 0.0) continue;
    point(0) = grid.midpoint(k);
    const double weighted = mass * fitness.eval(point);
    cells.push_back(k);
    p.push_back(weighted);
    norm += weighted;
  }
  // Cells below 1e-17 of the reweighted mass cannot move any output cell by
  // more than rounding; dropping them shortens the double sum.
  std::size_t kept = 0;
  double kept_norm = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] < 1e-17 * norm) continue;
    cells[kept] = cells[a];
    p[kept] = p[a];
    kept_norm += p[a];
    ++kept;
  }
  cells.resize(kept);
  p.resize(kept);
  for (double& v : p) v /= kept_norm;

  // Crossover law: deposit each (i, j, gamma) contribution linearly onto the
  // two midpoints around (1 - gamma) x_i + gamma x_j.
  const auto [nodes, weights] = gauss_legendre_unit(options.gauss_nodes);
  Eigen::VectorXd mixed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) + 1);
  const std::size_t count = cells.size();
  for (std::size_t g = 0; g < nodes.size(); ++g) {
    const double gamma = nodes[g];
    for (std::size_t a = 0; a < count; ++a) {
      const double base = static_cast<double>(cells[a]);
      const double pa = weights[g] * p[a];
      for (std::size_t b = 0; b < count; ++b) {
        const double t = base + gamma * (static_cast<double>(cells[b]) - base);
        const double floor_t = std::floor(t);
        const double frac = t - floor_t;
        const double mass = pa * p[b];
        const auto k = static_cast<Eigen::Index>(floor_t);
        mixed(k) += mass * (1.0 - frac);
        mixed(k + 1) += mass * frac;
      }
    }
  }

  Eigen::VectorXd out(static_cast<Eigen::Index>(m));
  if (sigma == 0.0) {
    out = mixed.head(static_cast<Eigen::Index>(m));
  } else {
    const auto reach = static_cast<Eigen::Index>(std::floor(options.kernel_cutoff * sigma / h));
    Eigen::VectorXd kernel(2 * reach + 1);
    for (Eigen::Index s = -reach; s <= reach; ++s) {
      const double z = static_cast<double>(s) * h / sigma;
      kernel(s + reach) = std::exp(-0.5 * z * z);
    }
    kernel /= kernel.sum();
    out.setZero();
    const auto mm = static_cast<Eigen::Index>(m);
    for (Eigen::Index k = 0; k < mm; ++k) {
      const double src = mixed(k);
      if (src == 0.0) continue;
      const Eigen::Index lo = std::max<Eigen::Index>(0, k - reach);
      const Eigen::Index hi = std::min<Eigen::Index>(mm - 1, k + reach);
      out.segment(lo, hi - lo + 1) += src * kernel.segment(lo - k + reach, hi - lo + 1);
    }
  }
  out *= f.total_mass();
  return GridDensity1D(grid, std::move(out));
}

GridDensity1D euler_step_grid(const GridDensity1D& f, double tau, const FitnessSpec& fitness, double sigma,
                              const GainOptions& options) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("euler step: tau must lie in (0, 1]");
  const GridDensity1D gain = gain_apply_1d(f, fitness, sigma, options);
  return GridDensity1D(f.grid(), (1.0 - tau) * f.masses() + tau * gain.masses());
}

std::vector<GridDensity1D> grid_trajectory(const GridDensity1D& f0, double tau, const FitnessSpec& fitness,
                                           double sigma, std::size_t steps, const GainOptions& options) {
  std::vector<GridDensity1D> out;
  out.reserve(steps + 1);
  out.push_back(f0);
  for (std::size_t n = 0; n < steps; ++n) out.push_back(euler_step_grid(out.back(), tau, fitness, sigma, options));
  return out;
}

ReferenceEnsemble nonlinear_step_ensemble(const ReferenceEnsemble& ensemble, const AuxiliaryDraws& draws,
                                          const ParentSource& parents, double sigma) {
  const auto n = ensemble.particles.cols();
  if (static_cast<std::size_t>(n) != draws.size() || draws.gamma.rows() != ensemble.particles.rows())
    throw std::invalid_argument("nonlinear step: draw count does not match the ensemble");
  if (parents.population_size() != draws.size())
    throw std::invalid_argument("nonlinear step: parent map expects a different population size");
  ReferenceEnsemble next{ensemble.step + 1, ensemble.particles};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!draws.gate[static_cast<std::size_t>(i)]) continue;
    next.particles.col(i) = crossover_mutation(parents.parent(draws.alpha1(i)), parents.parent(draws.alpha2(i)),
                                               draws.gamma.col(i), draws.xi.col(i), sigma);
  }
  return next;
}

double ks_distance(const Eigen::RowVectorXd& sample, const GridDensity1D& grid) {
  std::vector<double> xs(sample.data(), sample.data() + sample.size());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double g = grid.cdf(xs[i]);
    worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - g), std::abs(static_cast<double>(i) / n - g)});
  }
  return worst;
}

double gaussian_norm_moment(double q, int dim) {
  const double d = static_cast<double>(dim);
  return std::pow(2.0, 0.5 * q) * std::exp(std::lgamma(0.5 * (d + q)) - std::lgamma(0.5 * d));
}

MomentEnvelopeReport moment_bound_check(const std::vector<double>& mq_trajectory, double q,
                                        const FitnessConstants& fitness, double sigma, double tau, int dim) {
  if (!(q >= 1.0)) throw std::invalid_argument("moment check: q must be >= 1");
  if (mq_trajectory.empty()) throw std::invalid_argument("moment check: empty trajectory");
  MomentEnvelopeReport r;
  r.q = q;
  r.kappa = kappa(fitness);
  r.constant = std::pow(3.0, q - 1.0) * std::max(2.0, gaussian_norm_moment(q, dim));
  const double rate = tau * r.constant * r.kappa;
  const double sq = std::pow(sigma, q);
  constexpr double kRel = 1e-12;

  r.mq = mq_trajectory;
  double bound = mq_trajectory.front();
  for (std::size_t n = 0; n < mq_trajectory.size(); ++n) {
    const double m = mq_trajectory[n];
    r.root.push_back(std::pow(m, 1.0 / q));
    r.envelope.push_back(bound);
    r.exp_envelope.push_back(std::exp(r.constant * r.kappa * static_cast<double>(n) * tau) * (mq_trajectory.front() + sq));
    if (!std::isfinite(m) || m > bound * (1.0 + kRel) + kRel) r.envelope_ok = false;
    if (n + 1 < mq_trajectory.size()) {
      const double next = mq_trajectory[n + 1];
      if (next > (1.0 + rate) * m + rate * sq + kRel * (1.0 + next)) r.one_step_ok = false;
      const double base = tau * r.kappa * (m + sq);
      if (base > 0.0) r.max_required_constant = std::max(r.max_required_constant, (next - m) / base);
    }
    bound = (1.0 + rate) * bound + rate * sq;
  }
  return r;
}

}  // namespace gachaos
