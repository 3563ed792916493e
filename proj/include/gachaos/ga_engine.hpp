#pragma once

#include "gachaos/fitness.hpp"
#include "gachaos/measures.hpp"
#include "gachaos/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gachaos {

struct SimParams {
  std::size_t n_particles = 1;
  double tau = 1.0;    // substitution probability per sweep, in (0, 1]
  double sigma = 0.0;  // mutation strength
  std::size_t n_max = 0;
  int dim = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Parent selection over a weight vector in the open simplex.
///
/// Stores the scaled cumulative sums N * S_j (last entry clamped to N) and
/// resolves j(w, alpha) = min{ j : alpha < N S_j } by binary search. Indices
/// are 0-based.
class SelectionTable {
 public:
  explicit SelectionTable(const Eigen::VectorXd& weights);

  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }

  std::size_t index(double alpha) const;

  struct Rescaled {
    std::size_t index;
    double beta;  // in [0, 1); uniform given the index when alpha is uniform
  };
  /// beta = (alpha - N S_{j-1}) / (N w_j) for j = index(alpha).
  Rescaled rescale(double alpha) const;

 private:
  void check_alpha(double alpha) const;

  Eigen::VectorXd weights_;
  std::vector<double> scaled_cumsum_;
};

/// 0-based j(w, alpha).
std::size_t index_map(const Eigen::VectorXd& weights, double alpha);
SelectionTable::Rescaled beta_rescale(const Eigen::VectorXd& weights, double alpha);

/// Particle positions (d x N, one column per particle) at step n together
/// with their normalized fitness weights.
struct PopulationState {
  std::size_t step = 0;
  Eigen::MatrixXd positions;
  Eigen::VectorXd weights;

  static PopulationState from_positions(Eigen::MatrixXd positions, const FitnessSpec& fitness,
                                        std::size_t step = 0);
  std::size_t size() const { return static_cast<std::size_t>(positions.cols()); }
  Measure empirical() const { return Measure::uniform(positions); }
  Measure weighted() const { return Measure(positions, weights); }
};

/// The five per-particle random variables of one sweep.
struct AuxiliaryDraws {
  Eigen::MatrixXd gamma;           // d x N, entries in [0, 1]
  Eigen::MatrixXd xi;              // d x N, standard normal
  std::vector<std::uint8_t> gate;  // Bernoulli(tau)
  Eigen::VectorXd alpha1;          // Unif[0, N)
  Eigen::VectorXd alpha2;

  std::size_t size() const { return gate.size(); }
};

/// Position of a draw family in the counter space; draw_auxiliaries advances
/// `step` so successive calls produce successive sweeps.
struct DrawStream {
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  std::uint32_t step = 0;
};

AuxiliaryDraws draw_auxiliaries(DrawStream& state, const SimParams& params);

/// Draws for sweep `step` of (seed, stream) without touching a DrawStream.
AuxiliaryDraws draws_at(std::uint64_t seed, std::uint32_t stream, std::uint32_t step,
                        std::size_t n, int dim, double tau);

/// One synchronous sweep: every parent is read from `state`.
PopulationState ga_step(const PopulationState& state, const AuxiliaryDraws& draws,
                        const FitnessSpec& fitness, const SimParams& params);

/// Offspring (1 - gamma) * x + gamma * x_star + sigma * xi, componentwise.
template <typename A, typename B, typename G, typename X>
Eigen::VectorXd crossover_mutation(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& x_star,
                                   const Eigen::MatrixBase<G>& gamma, const Eigen::MatrixBase<X>& xi,
                                   double sigma) {
  return ((1.0 - gamma.array()) * x.array() + gamma.array() * x_star.array() + sigma * xi.array())
      .matrix();
}

/// Initial law f_0, isotropic across coordinates.
struct InitialLaw {
  enum class Kind { kNormal, kDirac, kUniform };
  Kind kind = Kind::kNormal;
  double center = 0.0;
  double spread = 1.0;  // standard deviation (normal) or half-width (uniform)

  /// Interval that holds all but a negligible amount of one coordinate's mass.
  std::pair<double, double> bulk_interval() const;
};

InitialLaw::Kind parse_initial_kind(const std::string& name);
std::string to_string(InitialLaw::Kind kind);

/// N i.i.d. samples (d x N) from f_0 on stream (seed, stream).
Eigen::MatrixXd sample_initial(const InitialLaw& law, int dim, std::size_t n, std::uint64_t seed,
                               std::uint32_t stream);

struct Trajectory {
  std::vector<PopulationState> states;  // n_max + 1 entries
  std::vector<AuxiliaryDraws> draws;    // n_max entries when recorded
};

/// Runs GA sweeps from n = 0 to n_max on stream (params.seed, stream).
Trajectory run(const SimParams& params, const FitnessSpec& fitness, const InitialLaw& initial,
               std::uint32_t stream = 0, bool keep_draws = true);

}  // namespace gachaos
