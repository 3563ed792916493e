#pragma once

#include <cstddef>
#include <vector>

namespace gachaos {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
  std::size_t n = 0;
};

MeanStderr mean_stderr(const std::vector<double>& values);

/// Least-squares line through (log x, log y).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_lo = 0.0;  // two-sided Student-t interval at `level`
  double ci_hi = 0.0;
  std::size_t points = 0;
};

/// Requires at least two points with positive coordinates.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double level = 0.95);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against Unif[0, 1). The p-value uses
/// the asymptotic Kolmogorov series with Stephens' small-sample correction.
KsResult ks_uniform(std::vector<double> samples);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

}  // namespace gachaos
