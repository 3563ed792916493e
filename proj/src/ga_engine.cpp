#include "gachaos/ga_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gachaos {

namespace {

// Slot layout inside Purpose::kStepDraws for dimension d.
std::uint32_t gamma_slot(int k) { return CounterRng::slot(Purpose::kStepDraws, static_cast<std::uint32_t>(k)); }
std::uint32_t xi_slot(int d, int k) { return CounterRng::slot(Purpose::kStepDraws, static_cast<std::uint32_t>(d + k)); }
std::uint32_t gate_slot(int d) { return CounterRng::slot(Purpose::kStepDraws, static_cast<std::uint32_t>(2 * d)); }
std::uint32_t alpha_slot(int d, int which) {
  return CounterRng::slot(Purpose::kStepDraws, static_cast<std::uint32_t>(2 * d + which));
}

double scaled_alpha(double u, double n) {
  const double alpha = u * n;
  return alpha < n ? alpha : std::nextafter(n, 0.0);
}

}  // namespace

void SimParams::validate() const {
  if (n_particles < 1) throw std::invalid_argument("n_particles must be >= 1");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be >= 0");
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
}

SelectionTable::SelectionTable(const Eigen::VectorXd& weights) : weights_(weights) {
  const auto n = weights.size();
  if (n == 0) throw std::invalid_argument("selection: empty weight vector");
  if (!weights.allFinite() || (weights.array() <= 0.0).any())
    throw std::invalid_argument("selection: weights must lie in the open simplex");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("selection: weights must sum to 1");
  scaled_cumsum_.resize(static_cast<std::size_t>(n));
  const double scale = static_cast<double>(n);
  double running = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    running += weights(j);
    scaled_cumsum_[static_cast<std::size_t>(j)] = scale * running;
  }
  scaled_cumsum_.back() = scale;
}

void SelectionTable::check_alpha(double alpha) const {
  if (!(alpha >= 0.0 && alpha < static_cast<double>(size())))
    throw std::invalid_argument("selection: alpha outside [0, N)");
}

std::size_t SelectionTable::index(double alpha) const {
  check_alpha(alpha);
  // First j with alpha < N S_j.
  const auto it = std::upper_bound(scaled_cumsum_.begin(), scaled_cumsum_.end(), alpha);
  return static_cast<std::size_t>(it - scaled_cumsum_.begin());
}

SelectionTable::Rescaled SelectionTable::rescale(double alpha) const {
  const std::size_t j = index(alpha);
  const double below = j == 0 ? 0.0 : scaled_cumsum_[j - 1];
  const double width = static_cast<double>(size()) * weights_(static_cast<Eigen::Index>(j));
  double beta = (alpha - below) / width;
  beta = std::clamp(beta, 0.0, std::nextafter(1.0, 0.0));
  return {j, beta};
}

std::size_t index_map(const Eigen::VectorXd& weights, double alpha) {
  return SelectionTable(weights).index(alpha);
}

SelectionTable::Rescaled beta_rescale(const Eigen::VectorXd& weights, double alpha) {
  return SelectionTable(weights).rescale(alpha);
}

PopulationState PopulationState::from_positions(Eigen::MatrixXd positions, const FitnessSpec& fitness,
                                                std::size_t step) {
  if (positions.cols() == 0) throw std::invalid_argument("population: no particles");
  if (!positions.allFinite()) throw std::invalid_argument("population: non-finite position");
  PopulationState state;
  state.step = step;
  Eigen::VectorXd f = fitness.eval_columns(positions);
  if ((f.array() <= 0.0).any()) throw std::invalid_argument("population: fitness must be positive");
  state.weights = f / f.sum();
  state.positions = std::move(positions);
  return state;
}

AuxiliaryDraws draws_at(std::uint64_t seed, std::uint32_t stream, std::uint32_t step, std::size_t n,
                        int dim, double tau) {
  const CounterRng rng(seed, stream, step);
  const auto cols = static_cast<Eigen::Index>(n);
  const double scale = static_cast<double>(n);
  AuxiliaryDraws draws;
  draws.gamma.resize(dim, cols);
  draws.xi.resize(dim, cols);
  draws.gate.resize(n);
  draws.alpha1.resize(cols);
  draws.alpha2.resize(cols);
  for (Eigen::Index i = 0; i < cols; ++i) {
    const auto p = static_cast<std::uint32_t>(i);
    for (int k = 0; k < dim; ++k) {
      draws.gamma(k, i) = rng.uniform(p, gamma_slot(k));
      draws.xi(k, i) = rng.normal(p, xi_slot(dim, k));
    }
    draws.gate[static_cast<std::size_t>(i)] = rng.uniform(p, gate_slot(dim)) < tau ? 1 : 0;
    draws.alpha1(i) = scaled_alpha(rng.uniform(p, alpha_slot(dim, 1)), scale);
    draws.alpha2(i) = scaled_alpha(rng.uniform(p, alpha_slot(dim, 2)), scale);
  }
  return draws;
}

AuxiliaryDraws draw_auxiliaries(DrawStream& state, const SimParams& params) {
  params.validate();
  auto draws = draws_at(state.seed, state.stream, state.step, params.n_particles, params.dim, params.tau);
  ++state.step;
  return draws;
}

PopulationState ga_step(const PopulationState& state, const AuxiliaryDraws& draws,
                        const FitnessSpec& fitness, const SimParams& params) {
  const auto n = state.positions.cols();
  if (static_cast<std::size_t>(n) != draws.size() || draws.gamma.cols() != n ||
      draws.gamma.rows() != state.positions.rows())
    throw std::invalid_argument("ga_step: draws do not match the population");
  const SelectionTable table(state.weights);
  Eigen::MatrixXd next = state.positions;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!draws.gate[static_cast<std::size_t>(i)]) continue;
    const auto first = static_cast<Eigen::Index>(table.index(draws.alpha1(i)));
    const auto second = static_cast<Eigen::Index>(table.index(draws.alpha2(i)));
    next.col(i) = crossover_mutation(state.positions.col(first), state.positions.col(second),
                                     draws.gamma.col(i), draws.xi.col(i), params.sigma);
  }
  return PopulationState::from_positions(std::move(next), fitness, state.step + 1);
}

std::pair<double, double> InitialLaw::bulk_interval() const {
  switch (kind) {
    case Kind::kNormal: return {center - 8.0 * spread, center + 8.0 * spread};
    case Kind::kDirac: return {center, center};
    case Kind::kUniform: return {center - spread, center + spread};
  }
  return {center, center};
}

InitialLaw::Kind parse_initial_kind(const std::string& name) {
  if (name == "normal") return InitialLaw::Kind::kNormal;
  if (name == "dirac") return InitialLaw::Kind::kDirac;
  if (name == "uniform") return InitialLaw::Kind::kUniform;
  throw std::invalid_argument("unknown initial law '" + name + "'");
}

std::string to_string(InitialLaw::Kind kind) {
  switch (kind) {
    case InitialLaw::Kind::kNormal: return "normal";
    case InitialLaw::Kind::kDirac: return "dirac";
    case InitialLaw::Kind::kUniform: return "uniform";
  }
  return "unknown";
}

Eigen::MatrixXd sample_initial(const InitialLaw& law, int dim, std::size_t n, std::uint64_t seed,
                               std::uint32_t stream) {
  const CounterRng rng(seed, stream, 0);
  Eigen::MatrixXd points(dim, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (int k = 0; k < dim; ++k) {
      const auto slot = CounterRng::slot(Purpose::kInitial, static_cast<std::uint32_t>(k));
      const auto p = static_cast<std::uint32_t>(i);
      switch (law.kind) {
        case InitialLaw::Kind::kNormal: points(k, i) = law.center + law.spread * rng.normal(p, slot); break;
        case InitialLaw::Kind::kDirac: points(k, i) = law.center; break;
        case InitialLaw::Kind::kUniform:
          points(k, i) = law.center + law.spread * (2.0 * rng.uniform(p, slot) - 1.0);
          break;
      }
    }
  }
  return points;
}

Trajectory run(const SimParams& params, const FitnessSpec& fitness, const InitialLaw& initial,
               std::uint32_t stream, bool keep_draws) {
  params.validate();
  Trajectory out;
  out.states.reserve(params.n_max + 1);
  out.states.push_back(PopulationState::from_positions(
      sample_initial(initial, params.dim, params.n_particles, params.seed, stream), fitness));
  DrawStream rng{params.seed, stream, 0};
  for (std::size_t n = 0; n < params.n_max; ++n) {
    auto draws = draw_auxiliaries(rng, params);
    out.states.push_back(ga_step(out.states.back(), draws, fitness, params));
    if (keep_draws) out.draws.push_back(std::move(draws));
  }
  return out;
}

}  // namespace gachaos
