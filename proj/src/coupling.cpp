#include "gachaos/coupling.hpp"

#include "gachaos/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gachaos {

namespace {

double alpha_from_uniform(double u, std::size_t n) {
  const double scale = static_cast<double>(n);
  const double alpha = u * scale;
  return alpha < scale ? alpha : std::nextafter(scale, 0.0);
}

}  // namespace

CouplingSampler::CouplingSampler(Measure reference, Eigen::MatrixXd positions, SelectionTable selection,
                                 TransportPlan plan, CostKind cost)
    : reference_(std::move(reference)),
      positions_(std::move(positions)),
      selection_(std::move(selection)),
      plan_(std::move(plan)),
      cost_(cost) {
  const auto n = static_cast<Eigen::Index>(selection_.size());
  conditionals_.resize(selection_.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& g = conditionals_[static_cast<std::size_t>(i)];
    const double column_mass = plan_.mass.col(i).sum();
    if (!(column_mass > 0.0)) throw std::runtime_error("coupling: empty plan column");
    double running = 0.0;
    for (Eigen::Index r = 0; r < plan_.rows(); ++r) {
      const double m = plan_.mass(r, i);
      if (m <= 0.0) continue;
      running += m;
      g.atoms.push_back(r);
      g.cumulative.push_back(running / column_mass);
    }
    g.cumulative.back() = 1.0;
  }
}

CouplingSampler CouplingSampler::build(const Measure& reference, const Eigen::MatrixXd& positions,
                                       const Eigen::VectorXd& weights, CostKind cost) {
  if (positions.rows() != reference.dim()) throw std::invalid_argument("coupling: dimension mismatch");
  if (positions.cols() != weights.size()) throw std::invalid_argument("coupling: weight count mismatch");
  SelectionTable selection(weights);  // rejects weights outside the open simplex
  const Measure population(positions, weights);
  TransportPlan plan = solve_ot(reference, population, cost);  // certified or throws
  return CouplingSampler(reference, positions, std::move(selection), std::move(plan), cost);
}

CouplingSampler::Draw CouplingSampler::draw(double alpha) const {
  const auto [partner, beta] = selection_.rescale(alpha);
  const auto& g = conditionals_[partner];
  const auto it = std::upper_bound(g.cumulative.begin(), g.cumulative.end(), beta);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - g.cumulative.begin()), g.atoms.size() - 1);
  return {g.atoms[k], partner, beta};
}

std::pair<Eigen::VectorXd, std::size_t> CouplingSampler::sample_xstar(double alpha) const {
  const Draw d = draw(alpha);
  return {reference_.atom(d.reference_atom), d.partner};
}

Eigen::VectorXd CouplingSampler::parent(double alpha) const {
  return reference_.atom(draw(alpha).reference_atom);
}

Eigen::VectorXd CouplingSampler::conditional(std::size_t i) const {
  const auto col = plan_.mass.col(static_cast<Eigen::Index>(i));
  return col / col.sum();
}

Eigen::VectorXd CouplingSampler::mixture() const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(reference_.size());
  for (std::size_t i = 0; i < selection_.size(); ++i)
    total += selection_.weights()(static_cast<Eigen::Index>(i)) * conditional(i);
  return total;
}

ReferenceSampler::ReferenceSampler(Measure reference, std::size_t population_size)
    : reference_(std::move(reference)), n_(population_size) {
  if (n_ == 0) throw std::invalid_argument("reference sampler: population size must be >= 1");
  cumulative_.resize(static_cast<std::size_t>(reference_.size()));
  double running = 0.0;
  for (Eigen::Index r = 0; r < reference_.size(); ++r) {
    running += reference_.weight(r);
    cumulative_[static_cast<std::size_t>(r)] = running;
  }
  cumulative_.back() = 1.0;
}

Eigen::Index ReferenceSampler::atom(double alpha) const {
  const double u = alpha / static_cast<double>(n_);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<Eigen::Index>(static_cast<Eigen::Index>(it - cumulative_.begin()), reference_.size() - 1);
}

Eigen::VectorXd ReferenceSampler::parent(double alpha) const { return reference_.atom(atom(alpha)); }

CouplingCostEstimate coupling_cost_check(const CouplingSampler& sampler, std::size_t n_draws,
                                         std::uint64_t seed, std::uint32_t stream) {
  if (n_draws < 1) throw std::invalid_argument("coupling_cost_check: need at least one draw");
  const CounterRng rng(seed, stream);
  const std::size_t n = sampler.population_size();
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < n_draws; ++t) {
    const double u = rng.uniform(static_cast<std::uint32_t>(t), CounterRng::slot(Purpose::kCouplingCheck, 0));
    const auto d = sampler.draw(alpha_from_uniform(u, n));
    const double c = ground_cost(sampler.cost(), sampler.reference().atom(d.reference_atom),
                                 sampler.positions().col(static_cast<Eigen::Index>(d.partner)));
    sum += c;
    sum_sq += c * c;
  }
  const double m = static_cast<double>(n_draws);
  CouplingCostEstimate out;
  out.mean = sum / m;
  const double var = n_draws > 1 ? std::max(0.0, (sum_sq - m * out.mean * out.mean) / (m - 1.0)) : 0.0;
  out.stderr_ = std::sqrt(var / m);
  out.plan_cost = sampler.plan().cost_value;
  out.draws = n_draws;
  return out;
}

Eigen::MatrixXd empirical_joint(const CouplingSampler& sampler, std::size_t n_draws, std::uint64_t seed,
                                std::uint32_t stream) {
  const CounterRng rng(seed, stream);
  const std::size_t n = sampler.population_size();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(sampler.plan().rows(), sampler.plan().cols());
  for (std::size_t t = 0; t < n_draws; ++t) {
    const double u = rng.uniform(static_cast<std::uint32_t>(t), CounterRng::slot(Purpose::kCouplingCheck, 1));
    const auto d = sampler.draw(alpha_from_uniform(u, n));
    counts(d.reference_atom, static_cast<Eigen::Index>(d.partner)) += 1.0;
  }
  return counts / static_cast<double>(n_draws);
}

double total_variation(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw std::invalid_argument("total_variation: shape mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace gachaos
