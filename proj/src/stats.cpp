#include "cox/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cox {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.03) return 1.0;  // series converges too slowly; tail is 1 to 1e-16
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  const auto m = sample.size();
  if (m == 0) throw std::invalid_argument("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double u = cdf(sample[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(m);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(m);
    d = std::max({d, std::abs(u - lo), std::abs(hi - u)});
  }
  const double sm = std::sqrt(static_cast<double>(m));
  // Stephens' finite-sample adjustment of the limiting distribution argument.
  const double lambda = (sm + 0.12 + 0.11 / sm) * d;
  return {d, kolmogorov_tail(lambda)};
}

MeanSe mean_and_se(const std::vector<double>& values) {
  MeanSe out;
  out.count = static_cast<Index>(values.size());
  if (out.count == 0) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.count);
  if (out.count < 2) return out;
  double ss = 0.0;
  for (double v : values) {
    const double c = v - out.mean;
    ss += c * c;
  }
  const double var = ss / static_cast<double>(out.count - 1);
  out.se = std::sqrt(var / static_cast<double>(out.count));
  return out;
}

}  // namespace cox
