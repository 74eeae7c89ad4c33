#include "cox/mple.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace cox {

namespace {

// Newton direction through the eigendecomposition so the same factorization
// yields the condition check. Throws on a numerically singular information.
Vector newton_direction(const Matrix& info, const Vector& score, double condition_limit) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(info);
  if (es.info() != Eigen::Success)
    throw FitError(FitErrorKind::singular_information,
                   "information eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (!(lo > 0.0) || hi / lo > condition_limit)
    throw FitError(FitErrorKind::singular_information,
                   "information matrix is singular or ill-conditioned (eigenvalues in [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "])");
  return es.eigenvectors() *
         (es.eigenvectors().transpose() * score).cwiseQuotient(ev);
}

}  // namespace

FitResult fit(const Dataset& ds, const SolverConfig& cfg) {
  if (ds.num_events() == 0)
    throw FitError(FitErrorKind::no_events,
                   "cannot fit: the sample has no uncensored observations");
  const Index d = ds.dim();
  Vector beta;
  if (cfg.initial.size() == 0) {
    beta = Vector::Zero(d);
  } else {
    if (cfg.initial.size() != d)
      throw std::invalid_argument("initial point dimension does not match the dataset");
    if (!cfg.initial.allFinite())
      throw std::invalid_argument("initial point must be finite");
    beta = cfg.initial;
  }
  if (!(cfg.tolerance > 0.0) || cfg.max_iterations < 1)
    throw std::invalid_argument("solver configuration must have tolerance > 0 and max_iterations >= 1");

  LikelihoodEval eval = evaluate_partial_likelihood(beta, ds);
  FitResult out;
  out.iterations = 0;

  // A point is a certified maximum only when the score is small AND the
  // Newton step it implies is small. On a monotone-likelihood ridge the
  // score and the curvature vanish together, so the score test alone would
  // pass at a point that is not a maximizer; the implied step stays order
  // one there and gives the ridge away.
  const auto is_maximum = [&](const Vector& b, const LikelihoodEval& e,
                              const Vector& direction) {
    return e.score.cwiseAbs().maxCoeff() <= cfg.tolerance &&
           direction.cwiseAbs().maxCoeff() <=
               cfg.step_tolerance * (1.0 + b.cwiseAbs().maxCoeff());
  };

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const Vector direction = newton_direction(eval.information, eval.score, cfg.condition_limit);
    if (is_maximum(beta, eval, direction)) {
      out.converged = true;
      break;
    }

    // Step halving: accept the first step that does not decrease the
    // objective beyond rounding noise.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::abs(eval.value));
    double step = 1.0;
    bool accepted = false;
    Vector candidate;
    LikelihoodEval cand_eval;
    for (int h = 0; h <= cfg.max_step_halvings; ++h) {
      candidate = beta + step * direction;
      cand_eval = evaluate_partial_likelihood(candidate, ds);
      if (cand_eval.value > eval.value - slack) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // flat to rounding noise in the ascent direction

    beta = candidate;
    eval = cand_eval;
    ++out.iterations;

    if (beta.cwiseAbs().maxCoeff() > cfg.divergence_bound)
      throw FitError(FitErrorKind::monotone_likelihood,
                     "monotone likelihood: no finite maximizer, the objective keeps "
                     "increasing along a ray (|beta| exceeded " +
                         std::to_string(cfg.divergence_bound) + ")");
  }

  if (!out.converged) {
    // The budget may have ended exactly on a maximum; certify it if so. A
    // singular information here means the final point cannot be certified,
    // which is an unconverged state, not an error: the work done is returned.
    try {
      const Vector direction =
          newton_direction(eval.information, eval.score, cfg.condition_limit);
      out.converged = is_maximum(beta, eval, direction);
    } catch (const FitError&) {
    }
  }

  out.beta_hat = beta;
  out.score_norm = eval.score.cwiseAbs().maxCoeff();
  out.log_likelihood = eval.value;
  out.information = eval.information;
  return out;
}

bool information_within_limit(const FitResult& fit, Index n, const Matrix& sigma,
                              double epsilon) {
  if (!fit.converged)
    throw std::invalid_argument("information_within_limit requires a converged fit");
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (sigma.rows() != sigma.cols() || sigma.rows() != fit.information.rows())
    throw std::invalid_argument("sigma dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  if (es.info() != Eigen::Success || !(es.eigenvalues()(0) > 0.0) ||
      es.eigenvalues()(0) <= es.eigenvalues()(sigma.rows() - 1) * 1e-12)
    throw std::domain_error("sigma is singular");
  const Matrix scaled = fit.information / static_cast<double>(n);
  const Matrix deviation =
      es.operatorInverseSqrt() * es.operatorInverseSqrt() * scaled -
      Matrix::Identity(sigma.rows(), sigma.cols());
  return deviation.norm() <= epsilon;  // Frobenius
}

}  // namespace cox
