#pragma once

#include <functional>
#include <vector>

#include "cox/types.hpp"

namespace cox {

double normal_cdf(double x);

// Two-sided Kolmogorov limit tail 2*sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_tail(double x);

struct KsResult {
  double statistic = 0.0;  // sup |F_m - F|
  double p_value = 1.0;    // asymptotic, finite-sample corrected
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sd / sqrt(count); 0 when count < 2
  Index count = 0;
};

MeanSe mean_and_se(const std::vector<double>& values);

// 97.5% standard normal quantile, for two-sided 95% Wald intervals.
inline constexpr double z_975 = 1.959963984540054;

}  // namespace cox
