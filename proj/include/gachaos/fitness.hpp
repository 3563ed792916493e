#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace gachaos {

enum class FitnessKind { kGaussianBump, kReciprocalRastrigin, kConstant };

std::string to_string(FitnessKind kind);
FitnessKind parse_fitness_kind(const std::string& name);

/// Axis-aligned box [lo, hi]^d over which a numerical constant was certified.
struct CertificationBox {
  double lo;
  double hi;
};

/// Bounds F in [f_lo, f_hi] and Lipschitz constant lip.
struct FitnessConstants {
  double f_lo;
  double f_hi;
  double lip;
  std::optional<CertificationBox> box;
};

/// A bounded, strictly positive, globally Lipschitz fitness function.
///
///  - constant:             F(x) = c
///  - gaussian_bump:        F(x) = f_lo + (f_hi - f_lo) exp(-|x - x0|^2 / (2 s^2))
///  - reciprocal_rastrigin: F(x) = f_lo + (1 - f_lo) / (1 + R(x)),
///                          R the standard Rastrigin function (R >= 0, R(0) = 0)
///
/// Constants are derived from the parameters on construction; nothing is
/// taken on trust from a config file.
class FitnessSpec {
 public:
  static FitnessSpec constant(double c);
  static FitnessSpec gaussian_bump(double f_lo, double f_hi, double width,
                                   Eigen::VectorXd center = {});
  static FitnessSpec reciprocal_rastrigin(double f_lo, int dim);

  FitnessKind kind() const { return kind_; }
  double width() const { return width_; }
  const Eigen::VectorXd& center() const { return center_; }
  int dim() const { return dim_; }

  template <typename Derived>
  double operator()(const Eigen::MatrixBase<Derived>& x) const {
    return eval(Eigen::Ref<const Eigen::VectorXd>(x));
  }
  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Evaluates F on every column.
  Eigen::VectorXd eval_columns(const Eigen::MatrixXd& points) const;

  const FitnessConstants& constants() const { return constants_; }

 private:
  FitnessSpec() = default;

  FitnessKind kind_ = FitnessKind::kConstant;
  double f_lo_ = 1.0;
  double f_hi_ = 1.0;
  double width_ = 1.0;
  Eigen::VectorXd center_;
  int dim_ = 0;
  FitnessConstants constants_{1.0, 1.0, 0.0, std::nullopt};
};

/// Returns (f_lo, f_hi, lip) for the spec.
inline const FitnessConstants& certified_constants(const FitnessSpec& spec) { return spec.constants(); }

/// Selection-stability constant C_F = (1/f_lo)(1 + f_hi/f_lo)(lip + 2 f_hi).
double c_f_constant(const FitnessConstants& constants);
inline double c_f_constant(const FitnessSpec& spec) { return c_f_constant(spec.constants()); }

/// Condition number f_hi / f_lo.
inline double kappa(const FitnessConstants& c) { return c.f_hi / c.f_lo; }

/// Rastrigin function sum_k (x_k^2 - 10 cos(2 pi x_k) + 10).
double rastrigin(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Numerical bound on max_t |R1'(t)| / (1 + R1(t))^2 for the one-dimensional
/// Rastrigin term R1, searched on [-6, 6]; outside that box the ratio is below
/// (12 + 20 pi) / 6^4 < 0.06, far under the interior maximum.
double rastrigin_gradient_ratio_bound();

}  // namespace gachaos
