#pragma once

#include "gachaos/ga_engine.hpp"
#include "gachaos/measures.hpp"
#include "gachaos/transport.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gachaos {

/// Anything that maps alpha in [0, N) to a parent position. For the
/// nonlinear system X*(alpha) must be distributed as the fitness-reweighted
/// reference law when alpha ~ Unif[0, N).
class ParentSource {
 public:
  virtual ~ParentSource() = default;
  virtual std::size_t population_size() const = 0;
  virtual Eigen::VectorXd parent(double alpha) const = 0;
};

/// Optimal-coupling parent map X*_f(x, w, alpha).
///
/// Holds an optimal plan between the reference f (rows) and the weighted
/// population mu_{x,w} (columns). Column i, divided by its mass w_i, is the
/// conditional law G^i; it is sampled by inverse CDF over reference atoms in
/// index order. For alpha ~ Unif[0, N) the pair (X*(alpha), x^{j(w,alpha)})
/// has law equal to the plan.
class CouplingSampler final : public ParentSource {
 public:
  static CouplingSampler build(const Measure& reference, const Eigen::MatrixXd& positions,
                               const Eigen::VectorXd& weights, CostKind cost);

  struct Draw {
    Eigen::Index reference_atom;
    std::size_t partner;  // j(w, alpha), 0-based
    double beta;
  };
  Draw draw(double alpha) const;

  /// (X*(alpha), partner index).
  std::pair<Eigen::VectorXd, std::size_t> sample_xstar(double alpha) const;

  std::size_t population_size() const override { return selection_.size(); }
  Eigen::VectorXd parent(double alpha) const override;

  const Measure& reference() const { return reference_; }
  const Eigen::MatrixXd& positions() const { return positions_; }
  const TransportPlan& plan() const { return plan_; }
  CostKind cost() const { return cost_; }

  /// G^i as a dense probability vector over reference atoms.
  Eigen::VectorXd conditional(std::size_t i) const;

  /// sum_i w_i G^i, which reproduces the reference weights.
  Eigen::VectorXd mixture() const;

 private:
  struct Conditional {
    std::vector<Eigen::Index> atoms;
    std::vector<double> cumulative;  // normalized, last entry 1
  };

  CouplingSampler(Measure reference, Eigen::MatrixXd positions, SelectionTable selection,
                  TransportPlan plan, CostKind cost);

  Measure reference_;
  Eigen::MatrixXd positions_;
  SelectionTable selection_;
  TransportPlan plan_;
  CostKind cost_;
  std::vector<Conditional> conditionals_;
};

/// Inverse-CDF parent map over a weighted reference measure: atom chosen by
/// alpha / N. Satisfies the marginal requirement without any coupling.
class ReferenceSampler final : public ParentSource {
 public:
  ReferenceSampler(Measure reference, std::size_t population_size);

  std::size_t population_size() const override { return n_; }
  Eigen::VectorXd parent(double alpha) const override;
  Eigen::Index atom(double alpha) const;

 private:
  Measure reference_;
  std::size_t n_;
  std::vector<double> cumulative_;
};

struct CouplingCostEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double plan_cost = 0.0;
  std::size_t draws = 0;
};

/// Monte Carlo average of c(X*, x^{partner}) over i.i.d. alpha ~ Unif[0, N).
CouplingCostEstimate coupling_cost_check(const CouplingSampler& sampler, std::size_t n_draws,
                                         std::uint64_t seed, std::uint32_t stream = 0);

/// Empirical joint frequencies of (reference atom, partner) over i.i.d.
/// alpha draws, normalized to a probability matrix.
Eigen::MatrixXd empirical_joint(const CouplingSampler& sampler, std::size_t n_draws, std::uint64_t seed,
                                std::uint32_t stream = 0);

/// Total variation 1/2 sum |P - Q|.
double total_variation(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

}  // namespace gachaos
