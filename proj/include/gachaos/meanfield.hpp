#pragma once

#include "gachaos/coupling.hpp"
#include "gachaos/fitness.hpp"
#include "gachaos/ga_engine.hpp"
#include "gachaos/measures.hpp"

#include <Eigen/Dense>

#include <vector>

namespace gachaos {

/// Uniform grid of `cells` cells on [lo, hi].
struct GridSpec {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t cells = 1;

  double width() const { return (hi - lo) / static_cast<double>(cells); }
  double midpoint(std::size_t k) const { return lo + (static_cast<double>(k) + 0.5) * width(); }
  void validate() const;
};

/// Cell masses of a one-dimensional density. The total is the retained
/// probability; mass pushed past the grid edges is dropped and shows up as
/// 1 - total_mass().
class GridDensity1D {
 public:
  GridDensity1D(GridSpec grid, Eigen::VectorXd masses);

  const GridSpec& grid() const { return grid_; }
  const Eigen::VectorXd& masses() const { return masses_; }
  double total_mass() const { return masses_.sum(); }

  /// Statistics of the normalized density with atoms at cell midpoints.
  double mean() const;
  double variance() const;
  double moment(double q) const;

  /// Midpoint atoms of the nonzero cells, normalized to a probability measure.
  Measure to_measure() const;

  /// Normalized CDF with mass spread uniformly inside each cell.
  double cdf(double x) const;

 private:
  GridSpec grid_;
  Eigen::VectorXd masses_;
};

/// Cell masses of f_0 (one coordinate of the isotropic initial law).
GridDensity1D discretize_initial(const InitialLaw& law, const GridSpec& grid);

/// Grid covering the bulk of f_0 widened by 12 sigma sqrt(max(1, n_max tau))
/// on each side. The centre of f_0 is a cell midpoint.
GridSpec adaptive_grid(const InitialLaw& law, double sigma, double tau, std::size_t n_max, std::size_t cells);

struct GainOptions {
  int gauss_nodes = 16;         // Gauss-Legendre nodes for gamma on [0, 1]
  double kernel_cutoff = 8.0;   // mutation kernel truncated at cutoff * sigma
};

/// Gauss-Legendre nodes and weights mapped to [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre_unit(int nodes);

/// Q+(f, f) on the grid: reweight by fitness, crossover by quadrature over
/// (cell, cell, gamma node) with linear deposit onto neighbouring
/// midpoints, then convolution with the N(0, sigma^2) kernel. Output mass is
/// the input mass minus what the kernel pushes off the grid.
GridDensity1D gain_apply_1d(const GridDensity1D& f, const FitnessSpec& fitness, double sigma,
                            const GainOptions& options = {});

/// f_{n+1} = (1 - tau) f_n + tau Q+(f_n, f_n).
GridDensity1D euler_step_grid(const GridDensity1D& f, double tau, const FitnessSpec& fitness, double sigma,
                              const GainOptions& options = {});

/// f_0, ..., f_{steps}.
std::vector<GridDensity1D> grid_trajectory(const GridDensity1D& f0, double tau, const FitnessSpec& fitness,
                                           double sigma, std::size_t steps, const GainOptions& options = {});

/// Particles of the nonlinear (i.i.d.) system at step n.
struct ReferenceEnsemble {
  std::size_t step = 0;
  Eigen::MatrixXd particles;  // d x M
};

/// One sweep of the nonlinear system driven by the same draws as the paired
/// GA sweep; parents come from `parents` (X*_n).
ReferenceEnsemble nonlinear_step_ensemble(const ReferenceEnsemble& ensemble, const AuxiliaryDraws& draws,
                                          const ParentSource& parents, double sigma);

/// sup_x |F_sample(x) - F_grid(x)| for a one-dimensional sample.
double ks_distance(const Eigen::RowVectorXd& sample, const GridDensity1D& grid);

/// E|xi|^q for xi ~ N(0, I_d).
double gaussian_norm_moment(double q, int dim);

struct MomentEnvelopeReport {
  double q = 0.0;
  double kappa = 1.0;
  double constant = 0.0;            // admissible C of the one-step recursion
  double max_required_constant = 0.0;  // smallest C the trajectory itself needs
  std::vector<double> mq;
  std::vector<double> root;
  std::vector<double> envelope;       // recursion envelope on M_q
  std::vector<double> exp_envelope;   // e^{C kappa n tau} (M_q(f_0) + sigma^q)
  bool one_step_ok = true;
  bool envelope_ok = true;
  bool ok() const { return one_step_ok && envelope_ok; }
};

/// Checks M_q(f_{n+1}) <= (1 + tau C kappa) M_q(f_n) + tau C kappa sigma^q along
/// a trajectory of q-th moments, with C = 3^{q-1} max(2, E|xi|^q), which
/// follows from |x'| <= |x| + |x_*| + sigma |xi| and convexity of t^q.
MomentEnvelopeReport moment_bound_check(const std::vector<double>& mq_trajectory, double q,
                                        const FitnessConstants& fitness, double sigma, double tau, int dim);

}  // namespace gachaos
