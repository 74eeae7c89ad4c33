#pragma once

#include <functional>
#include <variant>

#include "cox/quadrature.hpp"
#include "cox/types.hpp"

namespace cox {

// Baseline hazard families with closed-form cumulative hazard and inverse.
struct ExponentialHazard {
  double rate = 1.0;
};
struct WeibullHazard {
  double scale = 1.0;  // cumulative hazard scale * t^shape
  double shape = 1.0;
};
using BaselineHazard = std::variant<ExponentialHazard, WeibullHazard>;

// Covariate laws with computable moments: a finite mixture of atoms, or a
// uniform box in up to a few dimensions (integrated numerically).
struct FiniteDiscreteCovariates {
  Matrix atoms;  // one atom per row
  Vector probs;  // positive, sums to 1
};
struct UniformBoxCovariates {
  Vector lower;
  Vector upper;
};
using CovariateLaw = std::variant<FiniteDiscreteCovariates, UniformBoxCovariates>;

// Independent exponential censoring (rate 0 disables it) truncated at the
// administrative study end, so follow-up never exceeds study_end and a
// positive fraction of subjects reaches it.
struct CensoringLaw {
  double rate = 0.0;
  double study_end = 1.0;
};

struct ModelSpec {
  Vector beta0;
  BaselineHazard baseline;
  CovariateLaw covariates;
  CensoringLaw censoring;

  Index dim() const { return beta0.size(); }
  void validate() const;  // throws std::invalid_argument naming the bad field
};

double baseline_hazard(double t, const BaselineHazard& h);
double cumulative_hazard(double t, const BaselineHazard& h);
double inverse_cumulative_hazard(double y, const BaselineHazard& h);

// Expectation of g(Z) under the covariate law; T is double, Vector or Matrix.
double expect_scalar(const CovariateLaw& law,
                     const std::function<double(const Vector&)>& g,
                     const QuadratureConfig& cfg = {});
Vector expect_vector(const CovariateLaw& law,
                     const std::function<Vector(const Vector&)>& g,
                     const QuadratureConfig& cfg = {});
Matrix expect_matrix(const CovariateLaw& law,
                     const std::function<Matrix(const Vector&)>& g,
                     const QuadratureConfig& cfg = {});

// Population counterpart of risk_mass and its beta-derivatives:
// E[1{T >= t} exp(beta'Z)] under the model, with T the censored follow-up.
double model_risk_mass(double t, const Vector& beta, const ModelSpec& spec,
                       const QuadratureConfig& cfg = {});
Vector model_risk_mass_grad(double t, const Vector& beta, const ModelSpec& spec,
                            const QuadratureConfig& cfg = {});
Matrix model_risk_mass_hess(double t, const Vector& beta, const ModelSpec& spec,
                            const QuadratureConfig& cfg = {});

struct RiskMassMoments {
  double mass = 0.0;
  Vector grad;
  Matrix hess;
};
RiskMassMoments model_risk_mass_all(double t, const Vector& beta, const ModelSpec& spec,
                                    const QuadratureConfig& cfg = {});

// Large-n limit of information(beta0)/n: the integral over the study window
// of the risk-set covariance profile against the baseline hazard. Symmetric
// positive definite for nondegenerate covariate laws; throws
// std::domain_error otherwise.
Matrix asymptotic_information(const ModelSpec& spec,
                              const QuadratureConfig& cfg = {1e-6, 0.0, 40});

// P(T = study_end): the fraction of subjects whose follow-up reaches the
// administrative end. Positive by construction of the censoring law.
double prob_followup_to_study_end(const ModelSpec& spec);

}  // namespace cox
