#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "cox/types.hpp"

namespace cox {

struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_depth = 40;
};

struct GaussRule {
  Vector nodes;    // ascending, interior to (-1, 1)
  Vector weights;  // positive, sum to 2
};

namespace quad_detail {

// Nodes from Newton iteration on the Legendre three-term recurrence; no
// hardcoded tables, exact to machine precision for small n.
inline GaussRule compute_gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / pp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    rule.nodes(i) = -z;
    rule.nodes(n - 1 - i) = z;
    rule.weights(i) = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights(n - 1 - i) = rule.weights(i);
  }
  return rule;
}

inline double norm_of(double x) { return std::abs(x); }

template <class Derived>
double norm_of(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <class T>
T zero_like(const T& x) {
  if constexpr (std::is_arithmetic_v<T>) {
    return T{0};
  } else {
    T z = x;
    z.setZero();
    return z;
  }
}

}  // namespace quad_detail

inline const GaussRule& gauss_legendre(int n) {
  static const GaussRule g7 = quad_detail::compute_gauss_rule(7);
  static const GaussRule g15 = quad_detail::compute_gauss_rule(15);
  if (n == 7) return g7;
  if (n == 15) return g15;
  throw std::invalid_argument("gauss_legendre: only the 7- and 15-point rules are cached");
}

// Adaptive Gauss-Legendre integration of f over [a, b]. The integrand may
// return double, Vector or Matrix; the error metric is the max-abs entry.
// Bisects until the 7/15-point pair agrees to tolerance on every segment;
// throws QuadratureError if the accepted error budget is exceeded.
template <class F>
auto adaptive_integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {})
    -> std::decay_t<decltype(f(0.5 * (a + b)))> {
  using T = std::decay_t<decltype(f(0.5 * (a + b)))>;
  if (!(a <= b)) throw std::invalid_argument("adaptive_integrate: requires a <= b");
  T probe = f(0.5 * (a + b));
  if (a == b) return quad_detail::zero_like(probe);

  const GaussRule& low = gauss_legendre(7);
  const GaussRule& high = gauss_legendre(15);

  auto apply = [&f](const GaussRule& rule, double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    T acc = T(half * rule.weights(0) * f(mid + half * rule.nodes(0)));
    for (int k = 1; k < rule.nodes.size(); ++k)
      acc += half * rule.weights(k) * f(mid + half * rule.nodes(k));
    return acc;
  };

  struct Segment {
    double lo, hi;
    int depth;
  };
  std::vector<Segment> stack{{a, b, 0}};
  T total = quad_detail::zero_like(probe);
  double accepted_error = 0.0;
  double scale_floor = 0.0;

  while (!stack.empty()) {
    const Segment seg = stack.back();
    stack.pop_back();
    const T coarse = apply(low, seg.lo, seg.hi);
    const T fine = apply(high, seg.lo, seg.hi);
    const double err = quad_detail::norm_of(T(fine - coarse));
    const double local_scale =
        std::max(quad_detail::norm_of(fine), scale_floor * (seg.hi - seg.lo) / (b - a));
    const double tol = cfg.abs_tol + cfg.rel_tol * local_scale;
    const bool tiny = (seg.hi - seg.lo) <=
                      8.0 * std::numeric_limits<double>::epsilon() *
                          (std::abs(seg.lo) + std::abs(seg.hi) + 1.0);
    if (err <= tol || seg.depth >= cfg.max_depth || tiny) {
      total += fine;
      if (err > tol) accepted_error += err;
      scale_floor = std::max(scale_floor, quad_detail::norm_of(total));
    } else {
      const double mid = 0.5 * (seg.lo + seg.hi);
      stack.push_back({seg.lo, mid, seg.depth + 1});
      stack.push_back({mid, seg.hi, seg.depth + 1});
    }
  }

  const double budget =
      10.0 * (cfg.abs_tol + cfg.rel_tol * std::max(quad_detail::norm_of(total), 1e-300));
  if (accepted_error > budget)
    throw QuadratureError("adaptive_integrate: failed to reach tolerance (accepted error " +
                          std::to_string(accepted_error) + ")");
  return total;
}

}  // namespace cox
