#pragma once

#include "gachaos/measures.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace gachaos {

enum class CostKind { kEuclidean, kTruncated, kIndicator };

std::string to_string(CostKind kind);
CostKind parse_cost_kind(const std::string& name);

template <typename A, typename B>
double ground_cost(CostKind kind, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  switch (kind) {
    case CostKind::kEuclidean: return euclidean_distance(x, y);
    case CostKind::kTruncated: return truncated_cost(x, y);
    case CostKind::kIndicator:
      if (x.size() != y.size()) throw std::invalid_argument("cost: dimension mismatch");
      return (x.derived() == y.derived()) ? 0.0 : 1.0;
  }
  return 0.0;
}

/// Cost matrix C(i, j) = c(mu_i, nu_j).
Eigen::MatrixXd cost_matrix(const Measure& mu, const Measure& nu, CostKind kind);

/// A coupling of mu (rows) and nu (columns) with Kantorovich potentials.
struct TransportPlan {
  Eigen::MatrixXd mass;
  double cost_value = 0.0;
  Eigen::VectorXd dual_u;
  Eigen::VectorXd dual_v;

  Eigen::Index rows() const { return mass.rows(); }
  Eigen::Index cols() const { return mass.cols(); }
};

/// Common denominator used to turn weights into integer supplies. 10^15
/// keeps every marginal error below 1e-15 while sums stay inside int64.
inline constexpr std::int64_t kSupplyDenominator = 1'000'000'000'000'000;

/// Largest-remainder rounding of a probability vector to integers summing
/// exactly to `denominator`.
std::vector<std::int64_t> rationalize_weights(const Eigen::VectorXd& weights,
                                              std::int64_t denominator = kSupplyDenominator);

enum class OtRoute { kNetworkSimplex, kShortestPath };

/// Exact optimal transport between two discrete measures. Network simplex
/// first; if its certificate fails the successive-shortest-path solver is
/// used; if that fails too a std::runtime_error is thrown.
TransportPlan solve_ot(const Measure& mu, const Measure& nu, CostKind cost);

/// Forces one route, without fallback or certification.
TransportPlan solve_ot_with(const Measure& mu, const Measure& nu, CostKind cost, OtRoute route);

/// ||mu - nu||_BL = W1 under the truncated cost. Uses the exact line-graph
/// flow for d = 1 and the dense solver otherwise.
double bl_distance(const Measure& mu, const Measure& nu);

/// Dense-solver value of W1 under the truncated cost in any dimension.
double bl_distance_dense(const Measure& mu, const Measure& nu);

/// Exact W1 for d = 1 via min-cost flow on the sorted merged support; with
/// `truncated` each point is also linked to a hub at cost 1/2, which makes
/// the graph's shortest-path metric equal to min(|x - y|, 1).
double line_flow_distance_1d(const Measure& mu, const Measure& nu, bool truncated);

/// W1 with Euclidean cost in d = 1 from the CDF formula int |F_mu - F_nu|.
double w1_euclidean_1d(const Measure& mu, const Measure& nu);

struct PlanReport {
  bool ok = true;
  double max_marginal_violation = 0.0;
  double max_dual_violation = 0.0;        // max(u_i + v_j - c_ij, 0)
  double max_slackness_violation = 0.0;   // max |u_i + v_j - c_ij| over mass > 0
  double min_mass = 0.0;
  double duality_gap = 0.0;               // |cost - <mu,u> - <nu,v>|
  double cost_mismatch = 0.0;             // |cost_value - sum mass * c|
  std::vector<std::string> violations;
};

/// Checks marginals, dual feasibility and complementary slackness.
PlanReport verify_plan(const TransportPlan& plan, const Measure& mu, const Measure& nu, CostKind cost,
                       double tolerance = 1e-8);

/// Empirical-measure concentration rate: N^-1/2 (d = 1),
/// N^-1/2 log(1 + N) (d = 2), N^-1/d (d > 2).
double concentration_rate(long long n, int d);

}  // namespace gachaos
