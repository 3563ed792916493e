#include "gachaos/transport.hpp"

#include "gachaos/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gachaos {

namespace {

void require_same_dim(const Measure& mu, const Measure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("transport: dimension mismatch");
}

TransportPlan plan_from_flows(const Eigen::MatrixXd& cost, const std::vector<std::int64_t>& flow,
                              Eigen::VectorXd u, Eigen::VectorXd v) {
  const auto m = cost.rows(), k = cost.cols();
  TransportPlan plan;
  plan.mass.setZero(m, k);
  const double scale = 1.0 / static_cast<double>(kSupplyDenominator);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto f = flow[static_cast<std::size_t>(i * k + j)];
      if (f != 0) plan.mass(i, j) = static_cast<double>(f) * scale;
    }
  plan.cost_value = (plan.mass.array() * cost.array()).sum();
  // Potentials are defined up to u + s, v - s; anchor max(u) at 0.
  const double shift = u.maxCoeff();
  plan.dual_u = u.array() - shift;
  plan.dual_v = v.array() + shift;
  return plan;
}

TransportPlan solve_simplex(const Eigen::MatrixXd& cost, const std::vector<std::int64_t>& a,
                            const std::vector<std::int64_t>& b) {
  const auto m = static_cast<int>(cost.rows()), k = static_cast<int>(cost.cols());
  NetworkSimplex solver(m + k);
  solver.reserve_arcs(static_cast<std::size_t>(m) * static_cast<std::size_t>(k));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) solver.add_arc(i, m + j, cost(i, j));
  for (int i = 0; i < m; ++i) solver.set_supply(i, a[static_cast<std::size_t>(i)]);
  for (int j = 0; j < k; ++j) solver.set_supply(m + j, -b[static_cast<std::size_t>(j)]);
  if (solver.run() != NetworkSimplex::Status::kOptimal)
    throw std::runtime_error("transport: network simplex did not reach an optimal basis");
  std::vector<std::int64_t> flow(static_cast<std::size_t>(m) * static_cast<std::size_t>(k));
  for (int e = 0; e < solver.arc_count(); ++e) flow[static_cast<std::size_t>(e)] = solver.flow(e);
  Eigen::VectorXd u(m), v(k);
  for (int i = 0; i < m; ++i) u(i) = -solver.potential(i);
  for (int j = 0; j < k; ++j) v(j) = solver.potential(m + j);
  return plan_from_flows(cost, flow, std::move(u), std::move(v));
}

TransportPlan solve_shortest_path(const Eigen::MatrixXd& cost, const std::vector<std::int64_t>& a,
                                  const std::vector<std::int64_t>& b) {
  const auto m = static_cast<std::size_t>(cost.rows()), k = static_cast<std::size_t>(cost.cols());
  std::vector<double> flat(m * k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j)
      flat[i * k + j] = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const SspResult r = solve_transport_ssp(flat, m, k, a, b);
  return plan_from_flows(cost, r.flow, Eigen::Map<const Eigen::VectorXd>(r.row_potential.data(), static_cast<Eigen::Index>(m)),
                         Eigen::Map<const Eigen::VectorXd>(r.col_potential.data(), static_cast<Eigen::Index>(k)));
}

}  // namespace

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::kEuclidean: return "euclidean";
    case CostKind::kTruncated: return "truncated";
    case CostKind::kIndicator: return "indicator";
  }
  return "unknown";
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "euclidean") return CostKind::kEuclidean;
  if (name == "truncated") return CostKind::kTruncated;
  if (name == "indicator") return CostKind::kIndicator;
  throw std::invalid_argument("unknown cost '" + name + "'");
}

Eigen::MatrixXd cost_matrix(const Measure& mu, const Measure& nu, CostKind kind) {
  require_same_dim(mu, nu);
  Eigen::MatrixXd c(mu.size(), nu.size());
  for (Eigen::Index j = 0; j < nu.size(); ++j)
    for (Eigen::Index i = 0; i < mu.size(); ++i) c(i, j) = ground_cost(kind, mu.atom(i), nu.atom(j));
  return c;
}

std::vector<std::int64_t> rationalize_weights(const Eigen::VectorXd& weights, std::int64_t denominator) {
  const auto n = static_cast<std::size_t>(weights.size());
  std::vector<std::int64_t> out(n);
  std::vector<double> remainder(n);
  const double total = weights.sum();
  const double scale = static_cast<double>(denominator);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = weights(static_cast<Eigen::Index>(i)) / total * scale;
    out[i] = static_cast<std::int64_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return remainder[l] > remainder[r]; });
  std::int64_t residual = denominator - assigned;
  // Floors can overshoot only through rounding; take back from the smallest remainders.
  for (std::size_t t = 0; residual > 0; t = (t + 1) % n, --residual) ++out[order[t]];
  for (std::size_t t = n; residual < 0; --residual) {
    t = (t == 0 ? n : t) - 1;
    if (out[order[t]] > 0) --out[order[t]]; else ++residual;
  }
  return out;
}

TransportPlan solve_ot_with(const Measure& mu, const Measure& nu, CostKind cost, OtRoute route) {
  require_same_dim(mu, nu);
  const Eigen::MatrixXd c = cost_matrix(mu, nu, cost);
  const auto a = rationalize_weights(mu.weights());
  const auto b = rationalize_weights(nu.weights());
  return route == OtRoute::kNetworkSimplex ? solve_simplex(c, a, b) : solve_shortest_path(c, a, b);
}

TransportPlan solve_ot(const Measure& mu, const Measure& nu, CostKind cost) {
  require_same_dim(mu, nu);
  const Eigen::MatrixXd c = cost_matrix(mu, nu, cost);
  const auto a = rationalize_weights(mu.weights());
  const auto b = rationalize_weights(nu.weights());
  std::string failure;
  try {
    TransportPlan plan = solve_simplex(c, a, b);
    const PlanReport report = verify_plan(plan, mu, nu, cost);
    if (report.ok) return plan;
    failure = report.violations.front();
  } catch (const std::runtime_error& e) {
    failure = e.what();
  }
  TransportPlan plan = solve_shortest_path(c, a, b);
  const PlanReport report = verify_plan(plan, mu, nu, cost);
  if (!report.ok)
    throw std::runtime_error("transport: plan certificate failure (" + failure + "; fallback: " +
                             report.violations.front() + ")");
  return plan;
}

double bl_distance_dense(const Measure& mu, const Measure& nu) {
  return solve_ot(mu, nu, CostKind::kTruncated).cost_value;
}

double bl_distance(const Measure& mu, const Measure& nu) {
  require_same_dim(mu, nu);
  if (mu.dim() == 1) return line_flow_distance_1d(mu, nu, true);
  return bl_distance_dense(mu, nu);
}

double line_flow_distance_1d(const Measure& mu, const Measure& nu, bool truncated) {
  require_same_dim(mu, nu);
  if (mu.dim() != 1) throw std::invalid_argument("line flow: requires d = 1");
  const auto a = rationalize_weights(mu.weights());
  const auto b = rationalize_weights(nu.weights());

  std::vector<std::pair<double, std::int64_t>> atoms;
  atoms.reserve(a.size() + b.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) atoms.emplace_back(mu.support()(0, i), a[static_cast<std::size_t>(i)]);
  for (Eigen::Index j = 0; j < nu.size(); ++j) atoms.emplace_back(nu.support()(0, j), -b[static_cast<std::size_t>(j)]);
  std::sort(atoms.begin(), atoms.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  // Merge coincident points; points with zero net supply only relay flow
  // along the line and are dropped.
  std::vector<double> x;
  std::vector<std::int64_t> supply;
  for (std::size_t t = 0; t < atoms.size();) {
    std::size_t s = t;
    std::int64_t net = 0;
    while (s < atoms.size() && atoms[s].first == atoms[t].first) net += atoms[s++].second;
    if (net != 0) {
      x.push_back(atoms[t].first);
      supply.push_back(net);
    }
    t = s;
  }
  if (x.empty()) return 0.0;

  const int n = static_cast<int>(x.size());
  const int hub = n;
  NetworkSimplex solver(truncated ? n + 1 : n);
  solver.reserve_arcs(static_cast<std::size_t>(4 * n));
  for (int k = 0; k + 1 < n; ++k) {
    const double gap = x[static_cast<std::size_t>(k + 1)] - x[static_cast<std::size_t>(k)];
    if (truncated && gap >= 1.0) continue;  // the hub route is never worse
    solver.add_arc(k, k + 1, gap);
    solver.add_arc(k + 1, k, gap);
  }
  if (truncated)
    for (int k = 0; k < n; ++k) {
      solver.add_arc(k, hub, 0.5);
      solver.add_arc(hub, k, 0.5);
    }
  for (int k = 0; k < n; ++k) solver.set_supply(k, supply[static_cast<std::size_t>(k)]);
  if (solver.run() != NetworkSimplex::Status::kOptimal)
    throw std::runtime_error("line flow: solver failed");
  return solver.total_cost() / static_cast<double>(kSupplyDenominator);
}

double w1_euclidean_1d(const Measure& mu, const Measure& nu) {
  require_same_dim(mu, nu);
  if (mu.dim() != 1) throw std::invalid_argument("w1_euclidean_1d: requires d = 1");
  std::vector<std::pair<double, double>> events;
  events.reserve(static_cast<std::size_t>(mu.size() + nu.size()));
  for (Eigen::Index i = 0; i < mu.size(); ++i) events.emplace_back(mu.support()(0, i), mu.weight(i));
  for (Eigen::Index j = 0; j < nu.size(); ++j) events.emplace_back(nu.support()(0, j), -nu.weight(j));
  std::sort(events.begin(), events.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  double cdf_gap = 0.0, total = 0.0;
  for (std::size_t t = 0; t + 1 < events.size(); ++t) {
    cdf_gap += events[t].second;
    total += std::abs(cdf_gap) * (events[t + 1].first - events[t].first);
  }
  return total;
}

PlanReport verify_plan(const TransportPlan& plan, const Measure& mu, const Measure& nu, CostKind cost,
                       double tolerance) {
  PlanReport report;
  auto flag = [&](const std::string& what, double value) {
    report.ok = false;
    std::ostringstream os;
    os << what << " (" << value << ")";
    report.violations.push_back(os.str());
  };
  if (plan.rows() != mu.size() || plan.cols() != nu.size() || plan.dual_u.size() != mu.size() ||
      plan.dual_v.size() != nu.size()) {
    flag("shape mismatch", 0.0);
    return report;
  }
  const Eigen::MatrixXd c = cost_matrix(mu, nu, cost);

  report.min_mass = plan.mass.minCoeff();
  if (report.min_mass < -tolerance) flag("negative mass", report.min_mass);
  report.max_marginal_violation = std::max((plan.mass.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff(),
                                           (plan.mass.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff());
  if (report.max_marginal_violation > tolerance) flag("marginal violation", report.max_marginal_violation);

  const Eigen::MatrixXd slack = c - (plan.dual_u.replicate(1, nu.size()) + plan.dual_v.transpose().replicate(mu.size(), 1));
  report.max_dual_violation = std::max(0.0, -slack.minCoeff());
  if (report.max_dual_violation > tolerance) flag("dual infeasibility", report.max_dual_violation);
  for (Eigen::Index j = 0; j < plan.cols(); ++j)
    for (Eigen::Index i = 0; i < plan.rows(); ++i)
      if (plan.mass(i, j) > tolerance)
        report.max_slackness_violation = std::max(report.max_slackness_violation, std::abs(slack(i, j)));
  if (report.max_slackness_violation > tolerance) flag("complementary slackness", report.max_slackness_violation);

  const double recomputed = (plan.mass.array() * c.array()).sum();
  report.cost_mismatch = std::abs(recomputed - plan.cost_value);
  if (report.cost_mismatch > tolerance) flag("cost value mismatch", report.cost_mismatch);
  report.duality_gap = std::abs(plan.cost_value - mu.weights().dot(plan.dual_u) - nu.weights().dot(plan.dual_v));
  if (report.duality_gap > tolerance) flag("duality gap", report.duality_gap);
  return report;
}

double concentration_rate(long long n, int d) {
  if (n < 1 || d < 1) throw std::invalid_argument("concentration_rate: need n >= 1 and d >= 1");
  const double nn = static_cast<double>(n);
  if (d == 1) return 1.0 / std::sqrt(nn);
  if (d == 2) return std::log(1.0 + nn) / std::sqrt(nn);
  return std::pow(nn, -1.0 / d);
}

}  // namespace gachaos
