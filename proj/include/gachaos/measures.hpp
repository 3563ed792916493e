#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace gachaos {

using Point = Eigen::VectorXd;

/// Finitely supported probability measure sum_i w_i delta_{x_i}.
///
/// Atoms are the columns of a d x n support matrix. Duplicate atoms are kept
/// as separate columns: the coupling sampler addresses atoms by index.
template <typename Scalar>
class EmpiricalMeasure {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr Scalar kWeightSumTolerance = Scalar(1e-12);
  /// Largest deviation of sum(w) from 1 accepted (and renormalized away).
  static constexpr Scalar kWeightSumAccept = Scalar(1e-9);

  EmpiricalMeasure(Matrix support, Vector weights)
      : support_(std::move(support)), weights_(std::move(weights)) {
    validate_support();
    if (weights_.size() != support_.cols())
      throw std::invalid_argument("measure: weight count does not match atom count");
    if (!weights_.allFinite() || (weights_.array() < Scalar(0)).any())
      throw std::invalid_argument("measure: weights must be finite and nonnegative");
    const Scalar total = weights_.sum();
    if (std::abs(total - Scalar(1)) > kWeightSumAccept)
      throw std::invalid_argument("measure: weights do not sum to 1");
    weights_ /= total;
  }

  /// Normalizes arbitrary nonnegative masses with positive total.
  static EmpiricalMeasure from_masses(Matrix support, const Vector& masses) {
    const Scalar total = masses.sum();
    if (!(total > Scalar(0)) || !std::isfinite(total))
      throw std::invalid_argument("measure: total mass must be positive and finite");
    return EmpiricalMeasure(std::move(support), masses / total);
  }

  static EmpiricalMeasure uniform(Matrix points) {
    const auto n = points.cols();
    if (n == 0) throw std::invalid_argument("measure: empty point list");
    return EmpiricalMeasure(std::move(points), Vector::Constant(n, Scalar(1) / Scalar(n)));
  }

  Eigen::Index dim() const { return support_.rows(); }
  Eigen::Index size() const { return support_.cols(); }
  const Matrix& support() const { return support_; }
  const Vector& weights() const { return weights_; }
  Scalar weight(Eigen::Index i) const { return weights_(i); }
  auto atom(Eigen::Index i) const { return support_.col(i); }

 private:
  void validate_support() const {
    if (support_.cols() == 0) throw std::invalid_argument("measure: support is empty");
    if (support_.rows() == 0) throw std::invalid_argument("measure: dimension must be >= 1");
    if (!support_.allFinite()) throw std::invalid_argument("measure: non-finite coordinate");
  }

  Matrix support_;
  Vector weights_;
};

using Measure = EmpiricalMeasure<double>;

/// Equal-weight measure over the given points.
Measure uniform_empirical(const std::vector<Point>& points);

template <typename A, typename B>
typename A::Scalar euclidean_distance(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("cost: dimension mismatch");
  return (x - y).norm();
}

/// |x - y| ^ 1, the ground cost whose W1 is the bounded-Lipschitz distance.
template <typename A, typename B>
typename A::Scalar truncated_cost(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  using Scalar = typename A::Scalar;
  return std::min(euclidean_distance(x, y), Scalar(1));
}

template <typename Scalar>
struct MomentReport {
  Scalar q;
  Scalar value;  // M_q = sum_i w_i |x_i|^q
  Scalar root;   // M_q^{1/q}
};

template <typename Scalar>
MomentReport<Scalar> moment_q(const EmpiricalMeasure<Scalar>& mu, Scalar q) {
  if (!(q >= Scalar(1))) throw std::invalid_argument("moment_q: q must be >= 1");
  const auto norms = mu.support().colwise().norm();
  Scalar value(0);
  for (Eigen::Index i = 0; i < mu.size(); ++i) value += mu.weight(i) * std::pow(norms(i), q);
  return {q, value, std::pow(value, Scalar(1) / q)};
}

/// Reweights atoms by a strictly positive function: w_i F(x_i) / sum_j w_j F(x_j).
template <typename Scalar, typename Fn>
EmpiricalMeasure<Scalar> reweight_by(const EmpiricalMeasure<Scalar>& mu, Fn&& fitness) {
  typename EmpiricalMeasure<Scalar>::Vector masses(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const Scalar value = fitness(mu.atom(i));
    if (!(value > Scalar(0)))
      throw std::invalid_argument("reweight: fitness must be strictly positive on the support");
    masses(i) = mu.weight(i) * value;
  }
  return EmpiricalMeasure<Scalar>::from_masses(mu.support(), masses);
}

class FitnessSpec;

Measure reweight_by_fitness(const Measure& mu, const FitnessSpec& fitness);

// Text format: one atom per line, "weight c_1 ... c_d", '#' starts a comment.
void write_measure(std::ostream& out, const Measure& mu);
Measure read_measure(std::istream& in);
void save_measure(const std::filesystem::path& path, const Measure& mu);
Measure load_measure(const std::filesystem::path& path);

}  // namespace gachaos
