#include "gachaos/fitness.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gachaos {

namespace {

constexpr double kRastriginBoxHalfWidth = 6.0;

double rastrigin_term(double t) {
  return t * t - 10.0 * std::cos(2.0 * std::numbers::pi * t) + 10.0;
}

double gradient_ratio(double t) {
  const double slope = 2.0 * t + 20.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * t);
  const double denom = 1.0 + rastrigin_term(t);
  return std::abs(slope) / (denom * denom);
}

}  // namespace

std::string to_string(FitnessKind kind) {
  switch (kind) {
    case FitnessKind::kGaussianBump: return "gaussian_bump";
    case FitnessKind::kReciprocalRastrigin: return "reciprocal_rastrigin";
    case FitnessKind::kConstant: return "constant";
  }
  return "unknown";
}

FitnessKind parse_fitness_kind(const std::string& name) {
  if (name == "gaussian_bump") return FitnessKind::kGaussianBump;
  if (name == "reciprocal_rastrigin") return FitnessKind::kReciprocalRastrigin;
  if (name == "constant") return FitnessKind::kConstant;
  throw std::invalid_argument("unknown fitness kind '" + name + "'");
}

double rastrigin(const Eigen::Ref<const Eigen::VectorXd>& x) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) sum += rastrigin_term(x(k));
  return sum;
}

double rastrigin_gradient_ratio_bound() {
  static const double bound = [] {
    // Dense scan, then golden-section refinement around the best cell.
    constexpr int kSamples = 1'200'001;
    const double h = 2.0 * kRastriginBoxHalfWidth / (kSamples - 1);
    double best = 0.0, best_t = 0.0;
    for (int k = 0; k < kSamples; ++k) {
      const double t = -kRastriginBoxHalfWidth + h * k;
      if (const double r = gradient_ratio(t); r > best) {
        best = r;
        best_t = t;
      }
    }
    double a = best_t - h, b = best_t + h;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
      const double c = b - phi * (b - a), d = a + phi * (b - a);
      if (gradient_ratio(c) > gradient_ratio(d)) b = d; else a = c;
    }
    best = std::max(best, gradient_ratio(0.5 * (a + b)));
    return best * (1.0 + 1e-6);
  }();
  return bound;
}

FitnessSpec FitnessSpec::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("constant fitness: value must be positive and finite");
  FitnessSpec spec;
  spec.kind_ = FitnessKind::kConstant;
  spec.f_lo_ = spec.f_hi_ = c;
  spec.constants_ = {c, c, 0.0, std::nullopt};
  return spec;
}

FitnessSpec FitnessSpec::gaussian_bump(double f_lo, double f_hi, double width, Eigen::VectorXd center) {
  if (!(f_lo > 0.0)) throw std::invalid_argument("gaussian_bump: f_lo must be > 0");
  if (!(f_hi >= f_lo)) throw std::invalid_argument("gaussian_bump: f_hi must be >= f_lo");
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be > 0");
  if (!center.allFinite()) throw std::invalid_argument("gaussian_bump: non-finite center");
  FitnessSpec spec;
  spec.kind_ = FitnessKind::kGaussianBump;
  spec.f_lo_ = f_lo;
  spec.f_hi_ = f_hi;
  spec.width_ = width;
  spec.center_ = std::move(center);
  spec.dim_ = static_cast<int>(spec.center_.size());
  // |d/dr exp(-r^2/2s^2)| = r exp(-r^2/2s^2)/s^2 peaks at r = s with value 1/(s sqrt(e)).
  spec.constants_ = {f_lo, f_hi, (f_hi - f_lo) / (width * std::sqrt(std::numbers::e)), std::nullopt};
  return spec;
}

FitnessSpec FitnessSpec::reciprocal_rastrigin(double f_lo, int dim) {
  if (!(f_lo > 0.0 && f_lo < 1.0)) throw std::invalid_argument("reciprocal_rastrigin: f_lo must lie in (0, 1)");
  if (dim < 1) throw std::invalid_argument("reciprocal_rastrigin: dim must be >= 1");
  FitnessSpec spec;
  spec.kind_ = FitnessKind::kReciprocalRastrigin;
  spec.f_lo_ = f_lo;
  spec.f_hi_ = 1.0;
  spec.dim_ = dim;
  // |grad F| <= (1 - f_lo) sqrt(sum_k psi(x_k)^2) <= (1 - f_lo) sqrt(d) max psi,
  // with psi(t) = |R1'(t)| / (1 + R1(t))^2 and 1 + R >= 1 + R1(x_k).
  const double lip = (1.0 - f_lo) * std::sqrt(static_cast<double>(dim)) * rastrigin_gradient_ratio_bound();
  spec.constants_ = {f_lo, 1.0, lip, CertificationBox{-kRastriginBoxHalfWidth, kRastriginBoxHalfWidth}};
  return spec;
}

double FitnessSpec::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  switch (kind_) {
    case FitnessKind::kConstant:
      return f_lo_;
    case FitnessKind::kGaussianBump: {
      double r2;
      if (center_.size() == 0) {
        r2 = x.squaredNorm();
      } else {
        if (center_.size() != x.size()) throw std::invalid_argument("fitness: dimension mismatch");
        r2 = (x - center_).squaredNorm();
      }
      return f_lo_ + (f_hi_ - f_lo_) * std::exp(-r2 / (2.0 * width_ * width_));
    }
    case FitnessKind::kReciprocalRastrigin:
      if (x.size() != dim_) throw std::invalid_argument("fitness: dimension mismatch");
      return f_lo_ + (1.0 - f_lo_) / (1.0 + rastrigin(x));
  }
  return f_lo_;
}

Eigen::VectorXd FitnessSpec::eval_columns(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd values(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) values(i) = eval(points.col(i));
  return values;
}

double c_f_constant(const FitnessConstants& c) {
  return (1.0 / c.f_lo) * (1.0 + c.f_hi / c.f_lo) * (c.lip + 2.0 * c.f_hi);
}

}  // namespace gachaos
