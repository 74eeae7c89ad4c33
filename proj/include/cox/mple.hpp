#pragma once

#include <stdexcept>
#include <string>

#include "cox/partial_likelihood.hpp"

namespace cox {

struct SolverConfig {
  double tolerance = 1e-8;  // sup-norm of the score at convergence
  // Relative ceiling on the Newton step length at convergence. On a
  // separation ridge the score and the curvature decay together, so the
  // score test alone passes spuriously; the implied Newton step staying
  // large is what distinguishes a ridge from a maximum.
  double step_tolerance = 1e-5;
  int max_iterations = 50;
  int max_step_halvings = 20;
  double divergence_bound = 50.0;  // |beta_k| beyond this means a ridge to infinity
  double condition_limit = 1e12;   // information condition number ceiling
  Vector initial;                  // empty = zero start
};

enum class FitErrorKind {
  no_events,             // partial likelihood undefined
  singular_information,  // degenerate covariates in the risk sets
  monotone_likelihood,   // likelihood increases along a ray; no finite maximizer
};

struct FitError : std::runtime_error {
  FitErrorKind kind;
  FitError(FitErrorKind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

struct FitResult {
  Vector beta_hat;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;
  double log_likelihood = 0.0;
  Matrix information;  // negative Hessian at beta_hat
};

// Maximum partial likelihood estimate by Newton ascent with step halving.
// Convergence requires a small score AND a small implied Newton step at a
// well-conditioned information matrix; converged=false (without an error)
// means the iteration budget ran out before both held.
FitResult fit(const Dataset& ds, const SolverConfig& cfg = {});

// Whether the scaled observed information sits within epsilon of its large-n
// limit sigma, measured as || sigma^{ -1 } (information/n) - I ||_Frobenius.
bool information_within_limit(const FitResult& fit, Index n, const Matrix& sigma,
                              double epsilon);

}  // namespace cox
