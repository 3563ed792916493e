#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gachaos {

/// Primal network simplex for uncapacitated min-cost flow with integer
/// supplies and real arc costs.
///
/// Starts from the artificial-root spanning tree, prices arcs with block
/// search, and keeps a strongly feasible basis (leaving-arc ties broken
/// toward the last blocking arc of the cycle), so it terminates without
/// cycling. Potentials satisfy cost + pi[from] - pi[to] >= 0 on every arc at
/// optimality and == 0 on basic arcs.
class NetworkSimplex {
 public:
  enum class Status { kOptimal, kInfeasible, kUnbalanced };

  explicit NetworkSimplex(int nodes);

  void reserve_arcs(std::size_t count);
  int add_arc(int from, int to, double cost);
  void set_supply(int node, std::int64_t supply);

  Status run();

  int node_count() const { return nodes_; }
  int arc_count() const { return arcs_; }
  std::int64_t flow(int arc) const { return flow_[static_cast<std::size_t>(arc)]; }
  double potential(int node) const { return pi_[static_cast<std::size_t>(node)]; }
  /// sum over real arcs of flow * cost, in supply units.
  double total_cost() const;
  std::size_t pivots() const { return pivots_; }

 private:
  static constexpr int kUp = 1;
  static constexpr int kDown = -1;

  void init_tree();
  bool find_entering_arc();
  int find_join(int u, int v) const;
  void add_child(int parent, int child);
  void remove_child(int parent, int child);
  void reroot_and_update(int u_in, int v_in, int u_out);

  int nodes_;
  int arcs_ = 0;  // real arcs; artificial arcs follow them
  std::vector<int> source_, target_;
  std::vector<double> cost_;
  std::vector<std::int64_t> flow_;
  std::vector<std::int8_t> in_tree_;
  std::vector<std::int64_t> supply_;

  std::vector<int> parent_, pred_, pred_dir_, depth_;
  std::vector<int> first_child_, next_sibling_, prev_sibling_;
  std::vector<double> pi_;
  std::vector<int> stack_;

  int in_arc_ = -1;
  std::size_t next_arc_ = 0;
  std::size_t block_size_ = 1;
  std::size_t pivots_ = 0;
};

/// Successive-shortest-path solver for the dense transportation problem,
/// used as the fallback route when a network-simplex certificate fails.
struct SspResult {
  std::vector<std::int64_t> flow;  // row-major rows x cols
  std::vector<double> row_potential;
  std::vector<double> col_potential;  // row + col <= cost, equality on support
};

SspResult solve_transport_ssp(const std::vector<double>& cost, std::size_t rows, std::size_t cols,
                              const std::vector<std::int64_t>& row_supply,
                              const std::vector<std::int64_t>& col_demand);

}  // namespace gachaos
