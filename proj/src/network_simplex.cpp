#include "gachaos/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gachaos {

namespace {
constexpr std::int64_t kInfFlow = std::numeric_limits<std::int64_t>::max();
constexpr double kRelTol = 1e-13;
}  // namespace

NetworkSimplex::NetworkSimplex(int nodes) : nodes_(nodes), supply_(static_cast<std::size_t>(nodes), 0) {
  if (nodes < 1) throw std::invalid_argument("network simplex: need at least one node");
}

void NetworkSimplex::reserve_arcs(std::size_t count) {
  source_.reserve(count + static_cast<std::size_t>(nodes_));
  target_.reserve(count + static_cast<std::size_t>(nodes_));
  cost_.reserve(count + static_cast<std::size_t>(nodes_));
}

int NetworkSimplex::add_arc(int from, int to, double cost) {
  if (from < 0 || from >= nodes_ || to < 0 || to >= nodes_)
    throw std::invalid_argument("network simplex: arc endpoint out of range");
  if (!std::isfinite(cost)) throw std::invalid_argument("network simplex: non-finite arc cost");
  source_.push_back(from);
  target_.push_back(to);
  cost_.push_back(cost);
  return arcs_++;
}

void NetworkSimplex::set_supply(int node, std::int64_t supply) {
  supply_.at(static_cast<std::size_t>(node)) = supply;
}

double NetworkSimplex::total_cost() const {
  double total = 0.0;
  for (std::size_t e = 0; e < static_cast<std::size_t>(arcs_); ++e)
    if (flow_[e] != 0) total += static_cast<double>(flow_[e]) * cost_[e];
  return total;
}

void NetworkSimplex::add_child(int parent, int child) {
  const auto p = static_cast<std::size_t>(parent), c = static_cast<std::size_t>(child);
  next_sibling_[c] = first_child_[p];
  prev_sibling_[c] = -1;
  if (first_child_[p] != -1) prev_sibling_[static_cast<std::size_t>(first_child_[p])] = child;
  first_child_[p] = child;
}

void NetworkSimplex::remove_child(int parent, int child) {
  const auto c = static_cast<std::size_t>(child);
  if (prev_sibling_[c] != -1)
    next_sibling_[static_cast<std::size_t>(prev_sibling_[c])] = next_sibling_[c];
  else
    first_child_[static_cast<std::size_t>(parent)] = next_sibling_[c];
  if (next_sibling_[c] != -1) prev_sibling_[static_cast<std::size_t>(next_sibling_[c])] = prev_sibling_[c];
}

void NetworkSimplex::init_tree() {
  const auto n = static_cast<std::size_t>(nodes_);
  const int root = nodes_;
  double max_cost = 0.0;
  for (double c : cost_) max_cost = std::max(max_cost, std::abs(c));
  const double art_cost = (max_cost + 1.0) * static_cast<double>(nodes_ + 1);

  // Drop artificial arcs from a previous run.
  source_.resize(static_cast<std::size_t>(arcs_));
  target_.resize(static_cast<std::size_t>(arcs_));
  cost_.resize(static_cast<std::size_t>(arcs_));
  flow_.assign(static_cast<std::size_t>(arcs_) + n, 0);
  in_tree_.assign(static_cast<std::size_t>(arcs_) + n, 0);

  parent_.assign(n + 1, -1);
  pred_.assign(n + 1, -1);
  pred_dir_.assign(n + 1, 0);
  depth_.assign(n + 1, 0);
  first_child_.assign(n + 1, -1);
  next_sibling_.assign(n + 1, -1);
  prev_sibling_.assign(n + 1, -1);
  pi_.assign(n + 1, 0.0);

  for (int u = 0; u < nodes_; ++u) {
    const auto uu = static_cast<std::size_t>(u);
    const int e = static_cast<int>(source_.size());
    if (supply_[uu] >= 0) {
      source_.push_back(u);
      target_.push_back(root);
      cost_.push_back(0.0);
      flow_[static_cast<std::size_t>(e)] = supply_[uu];
      pred_dir_[uu] = kUp;
      pi_[uu] = 0.0;
    } else {
      source_.push_back(root);
      target_.push_back(u);
      cost_.push_back(art_cost);
      flow_[static_cast<std::size_t>(e)] = -supply_[uu];
      pred_dir_[uu] = kDown;
      pi_[uu] = art_cost;
    }
    in_tree_[static_cast<std::size_t>(e)] = 1;
    parent_[uu] = root;
    pred_[uu] = e;
    depth_[uu] = 1;
    add_child(root, u);
  }

  block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs_))));
  next_arc_ = 0;
  pivots_ = 0;
}

bool NetworkSimplex::find_entering_arc() {
  const auto m = static_cast<std::size_t>(arcs_);
  if (m == 0) return false;
  double best = 0.0;
  std::size_t count = block_size_;
  std::size_t e = next_arc_;
  for (std::size_t scanned = 0; scanned < m; ++scanned) {
    if (!in_tree_[e]) {
      const double ps = pi_[static_cast<std::size_t>(source_[e])];
      const double pt = pi_[static_cast<std::size_t>(target_[e])];
      const double reduced = cost_[e] + ps - pt;
      const double tol = kRelTol * (1.0 + std::abs(cost_[e]) + std::abs(ps) + std::abs(pt));
      if (reduced < -tol && reduced < best) {
        best = reduced;
        in_arc_ = static_cast<int>(e);
      }
    }
    if (++e == m) e = 0;
    if (--count == 0) {
      if (best < 0.0) {
        next_arc_ = e;
        return true;
      }
      count = block_size_;
    }
  }
  if (best < 0.0) {
    next_arc_ = e;
    return true;
  }
  return false;
}

int NetworkSimplex::find_join(int u, int v) const {
  while (u != v) {
    const auto du = depth_[static_cast<std::size_t>(u)], dv = depth_[static_cast<std::size_t>(v)];
    if (du >= dv) u = parent_[static_cast<std::size_t>(u)];
    if (dv >= du) v = parent_[static_cast<std::size_t>(v)];
  }
  return u;
}

void NetworkSimplex::reroot_and_update(int u_in, int v_in, int u_out) {
  const auto in = static_cast<std::size_t>(in_arc_);
  int new_parent = v_in;
  int new_pred = in_arc_;
  int new_dir = (u_in == source_[in]) ? kUp : kDown;
  int x = u_in;
  for (;;) {
    const auto xx = static_cast<std::size_t>(x);
    const int old_parent = parent_[xx];
    const int old_pred = pred_[xx];
    const int old_dir = pred_dir_[xx];
    remove_child(old_parent, x);
    parent_[xx] = new_parent;
    pred_[xx] = new_pred;
    pred_dir_[xx] = new_dir;
    add_child(new_parent, x);
    if (x == u_out) break;
    new_parent = x;
    new_pred = old_pred;
    new_dir = -old_dir;
    x = old_parent;
  }

  const auto ui = static_cast<std::size_t>(u_in);
  const double shift = pi_[static_cast<std::size_t>(v_in)] - pi_[ui] - pred_dir_[ui] * cost_[in];
  stack_.clear();
  stack_.push_back(u_in);
  while (!stack_.empty()) {
    const int y = stack_.back();
    stack_.pop_back();
    const auto yy = static_cast<std::size_t>(y);
    pi_[yy] += shift;
    depth_[yy] = depth_[static_cast<std::size_t>(parent_[yy])] + 1;
    for (int c = first_child_[yy]; c != -1; c = next_sibling_[static_cast<std::size_t>(c)]) stack_.push_back(c);
  }
}

NetworkSimplex::Status NetworkSimplex::run() {
  if (std::accumulate(supply_.begin(), supply_.end(), std::int64_t{0}) != 0) return Status::kUnbalanced;
  init_tree();

  while (find_entering_arc()) {
    ++pivots_;
    const auto in = static_cast<std::size_t>(in_arc_);
    const int first = source_[in];
    const int second = target_[in];
    const int join = find_join(first, second);

    std::int64_t delta = kInfFlow;
    int u_out = -1;
    int side = 0;
    for (int u = first; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const auto uu = static_cast<std::size_t>(u);
      if (pred_dir_[uu] == kUp) {
        const std::int64_t d = flow_[static_cast<std::size_t>(pred_[uu])];
        if (d < delta) {
          delta = d;
          u_out = u;
          side = 1;
        }
      }
    }
    for (int u = second; u != join; u = parent_[static_cast<std::size_t>(u)]) {
      const auto uu = static_cast<std::size_t>(u);
      if (pred_dir_[uu] == kDown) {
        const std::int64_t d = flow_[static_cast<std::size_t>(pred_[uu])];
        if (d <= delta) {
          delta = d;
          u_out = u;
          side = 2;
        }
      }
    }
    if (side == 0) throw std::runtime_error("network simplex: unbounded (negative cycle)");

    if (delta > 0) {
      flow_[in] += delta;
      for (int u = first; u != join; u = parent_[static_cast<std::size_t>(u)]) {
        const auto uu = static_cast<std::size_t>(u);
        flow_[static_cast<std::size_t>(pred_[uu])] -= pred_dir_[uu] * delta;
      }
      for (int u = second; u != join; u = parent_[static_cast<std::size_t>(u)]) {
        const auto uu = static_cast<std::size_t>(u);
        flow_[static_cast<std::size_t>(pred_[uu])] += pred_dir_[uu] * delta;
      }
    }

    const int out_arc = pred_[static_cast<std::size_t>(u_out)];
    in_tree_[static_cast<std::size_t>(out_arc)] = 0;
    in_tree_[in] = 1;
    if (side == 1)
      reroot_and_update(first, second, u_out);
    else
      reroot_and_update(second, first, u_out);
  }

  for (std::size_t e = static_cast<std::size_t>(arcs_); e < flow_.size(); ++e)
    if (flow_[e] != 0) return Status::kInfeasible;
  return Status::kOptimal;
}

SspResult solve_transport_ssp(const std::vector<double>& cost, std::size_t rows, std::size_t cols,
                              const std::vector<std::int64_t>& row_supply,
                              const std::vector<std::int64_t>& col_demand) {
  if (cost.size() != rows * cols || row_supply.size() != rows || col_demand.size() != cols)
    throw std::invalid_argument("ssp: inconsistent shapes");
  if (std::accumulate(row_supply.begin(), row_supply.end(), std::int64_t{0}) !=
      std::accumulate(col_demand.begin(), col_demand.end(), std::int64_t{0}))
    throw std::invalid_argument("ssp: unbalanced supplies");

  const std::size_t n = rows + cols;  // rows first, then columns
  std::vector<std::int64_t> flow(rows * cols, 0);
  std::vector<std::int64_t> left(row_supply), need(col_demand);
  std::vector<double> pot(n, 0.0), dist(n);
  std::vector<std::int8_t> done(n);
  std::vector<std::ptrdiff_t> prev(n);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Initial potentials make every forward reduced cost nonnegative.
  for (std::size_t j = 0; j < cols; ++j) {
    double m = kInf;
    for (std::size_t i = 0; i < rows; ++i) m = std::min(m, cost[i * cols + j]);
    pot[rows + j] = m;
  }

  for (;;) {
    bool any = false;
    for (std::size_t i = 0; i < rows; ++i) any |= left[i] > 0;
    if (!any) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(prev.begin(), prev.end(), -1);
    for (std::size_t i = 0; i < rows; ++i)
      if (left[i] > 0) dist[i] = 0.0;

    std::ptrdiff_t sink = -1;
    for (;;) {
      std::ptrdiff_t best = -1;
      for (std::size_t v = 0; v < n; ++v)
        if (!done[v] && dist[v] < kInf && (best < 0 || dist[v] < dist[static_cast<std::size_t>(best)]))
          best = static_cast<std::ptrdiff_t>(v);
      if (best < 0) break;
      const auto b = static_cast<std::size_t>(best);
      done[b] = 1;
      if (b >= rows && need[b - rows] > 0) {
        sink = best;
        break;
      }
      if (b < rows) {
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t v = rows + j;
          if (done[v]) continue;
          const double nd = dist[b] + std::max(0.0, cost[b * cols + j] + pot[b] - pot[v]);
          if (nd < dist[v]) {
            dist[v] = nd;
            prev[v] = best;
          }
        }
      } else {
        const std::size_t j = b - rows;
        for (std::size_t i = 0; i < rows; ++i) {
          if (done[i] || flow[i * cols + j] == 0) continue;
          const double nd = dist[b] + std::max(0.0, -cost[i * cols + j] + pot[b] - pot[i]);
          if (nd < dist[i]) {
            dist[i] = nd;
            prev[i] = best;
          }
        }
      }
    }
    if (sink < 0) throw std::runtime_error("ssp: no augmenting path");

    const double reach = dist[static_cast<std::size_t>(sink)];
    for (std::size_t v = 0; v < n; ++v) pot[v] += std::min(dist[v], reach);

    std::int64_t push = need[static_cast<std::size_t>(sink) - rows];
    std::size_t v = static_cast<std::size_t>(sink);
    while (prev[v] >= 0) {
      const auto u = static_cast<std::size_t>(prev[v]);
      if (u >= rows) push = std::min(push, flow[v * cols + (u - rows)]);  // backward arc col u -> row v
      v = u;
    }
    push = std::min(push, left[v]);

    need[static_cast<std::size_t>(sink) - rows] -= push;
    left[v] -= push;
    v = static_cast<std::size_t>(sink);
    while (prev[v] >= 0) {
      const auto u = static_cast<std::size_t>(prev[v]);
      if (u < rows)
        flow[u * cols + (v - rows)] += push;
      else
        flow[v * cols + (u - rows)] -= push;
      v = u;
    }
  }

  SspResult result;
  result.flow = std::move(flow);
  result.row_potential.resize(rows);
  result.col_potential.resize(cols);
  for (std::size_t i = 0; i < rows; ++i) result.row_potential[i] = -pot[i];
  for (std::size_t j = 0; j < cols; ++j) result.col_potential[j] = pot[rows + j];
  return result;
}

}  // namespace gachaos
