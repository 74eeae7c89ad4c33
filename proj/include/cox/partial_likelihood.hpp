#pragma once

#include <vector>

#include "cox/survival_data.hpp"
#include "cox/types.hpp"

namespace cox {

// Exponentially weighted fraction of the sample still at risk at t:
//   (1/n) sum_i 1{T_i >= t} exp(beta'Z_i).
// Nonincreasing and left-continuous in t. Plain one-pass sums; the sweep
// below is the numerically hardened route for repeated queries.
double risk_mass(double t, const Vector& beta, const Dataset& ds);

// Gradient and Hessian of risk_mass with respect to beta.
Vector risk_mass_grad(double t, const Vector& beta, const Dataset& ds);
Matrix risk_mass_hess(double t, const Vector& beta, const Dataset& ds);

// Risk-set suffix statistics at every distinct observed time from a single
// backward sweep. Sums are kept as exp(shift) * (s, v, q) with s >= 1, so
// extreme linear predictors cannot overflow; the stored ratios v/s and q/s
// are shift-free.
struct RiskSetCurves {
  Vector times;    // distinct observed times, ascending
  Vector mass;     // risk_mass at each time
  Vector log_sum;  // log sum_{T_j >= times[k]} exp(beta'Z_j)
  Matrix grad_over_mass;               // K x d rows of D1/Phi
  std::vector<Matrix> hess_over_mass;  // per-time D2/Phi, empty unless requested

  // First index k with times[k] >= t; K when t exceeds every observation.
  Index risk_index(double t) const;
  double mass_at(double t) const;
  Vector grad_at(double t) const;
  Matrix hess_at(double t) const;
};

RiskSetCurves risk_set_curves(const Dataset& ds, const Vector& beta,
                              bool with_hessian = false);

// Log partial likelihood (raw sum over uncensored subjects, not divided
// by n), its gradient, and the negative Hessian, all in one sweep. Ties
// share the full risk set. Throws std::invalid_argument when the sample
// has no uncensored observations.
struct LikelihoodEval {
  double value = 0.0;
  Vector score;
  Matrix information;  // negative Hessian, symmetric PSD
};

LikelihoodEval evaluate_partial_likelihood(const Vector& beta, const Dataset& ds);

double log_partial_likelihood(const Vector& beta, const Dataset& ds);
Vector score(const Vector& beta, const Dataset& ds);
Matrix information(const Vector& beta, const Dataset& ds);

// Score truncated to events with T_i <= t (the full score when t covers
// the sample).
Vector score_up_to(double t, const Vector& beta, const Dataset& ds);

}  // namespace cox
