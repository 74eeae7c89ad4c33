#include "cox/population.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cox {

namespace {

template <class T, class G>
T expect_impl(const CovariateLaw& law, const G& g, const QuadratureConfig& cfg) {
  if (const auto* fd = std::get_if<FiniteDiscreteCovariates>(&law)) {
    Vector z = fd->atoms.row(0).transpose();
    T acc = T(fd->probs(0) * g(z));
    for (Index j = 1; j < fd->probs.size(); ++j) {
      z = fd->atoms.row(j).transpose();
      acc += fd->probs(j) * g(z);
    }
    return acc;
  }
  const auto& box = std::get<UniformBoxCovariates>(law);
  const Index d = box.lower.size();
  double volume = 1.0;
  for (Index k = 0; k < d; ++k) volume *= box.upper(k) - box.lower(k);
  Vector z(d);
  std::function<T(Index)> layer = [&](Index k) -> T {
    if (k == d) return g(z);
    return adaptive_integrate(
        [&](double x) {
          z(k) = x;
          return layer(k + 1);
        },
        box.lower(k), box.upper(k), cfg);
  };
  T total = layer(0);
  return T(total / volume);
}

}  // namespace

void ModelSpec::validate() const {
  const Index d = beta0.size();
  if (d < 1 || !beta0.allFinite())
    throw std::invalid_argument("beta0: must be a nonempty finite vector");

  if (const auto* e = std::get_if<ExponentialHazard>(&baseline)) {
    if (!(e->rate > 0.0) || !std::isfinite(e->rate))
      throw std::invalid_argument("baseline.rate: must be a finite positive number");
  } else {
    const auto& w = std::get<WeibullHazard>(baseline);
    if (!(w.scale > 0.0) || !std::isfinite(w.scale))
      throw std::invalid_argument("baseline.scale: must be a finite positive number");
    if (!(w.shape > 0.0) || !std::isfinite(w.shape))
      throw std::invalid_argument("baseline.shape: must be a finite positive number");
  }

  if (const auto* fd = std::get_if<FiniteDiscreteCovariates>(&covariates)) {
    if (fd->atoms.rows() < 1 || fd->atoms.rows() != fd->probs.size())
      throw std::invalid_argument("covariates.atoms: need one row per probability");
    if (fd->atoms.cols() != d)
      throw std::invalid_argument("covariates.atoms: column count must match beta0");
    if (!fd->atoms.allFinite())
      throw std::invalid_argument("covariates.atoms: must be finite");
    double sum = 0.0;
    for (Index j = 0; j < fd->probs.size(); ++j) {
      if (!(fd->probs(j) > 0.0))
        throw std::invalid_argument("covariates.probs: must be strictly positive");
      sum += fd->probs(j);
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("covariates.probs: must sum to 1");
  } else {
    const auto& box = std::get<UniformBoxCovariates>(covariates);
    if (box.lower.size() != d || box.upper.size() != d)
      throw std::invalid_argument("covariates.lower/upper: dimension must match beta0");
    if (d > 3)
      throw std::invalid_argument("covariates: uniform boxes are supported up to dimension 3");
    for (Index k = 0; k < d; ++k)
      if (!(box.lower(k) < box.upper(k)) || !std::isfinite(box.lower(k)) ||
          !std::isfinite(box.upper(k)))
        throw std::invalid_argument("covariates.lower/upper: need finite lower < upper");
  }

  if (!(censoring.rate >= 0.0) || !std::isfinite(censoring.rate))
    throw std::invalid_argument("censoring.rate: must be finite and nonnegative");
  if (!(censoring.study_end > 0.0) || !std::isfinite(censoring.study_end))
    throw std::invalid_argument(
        "censoring.study_end: must be a finite positive time; the design requires an "
        "administrative study end that a positive fraction of subjects reaches");
}

double baseline_hazard(double t, const BaselineHazard& h) {
  if (const auto* e = std::get_if<ExponentialHazard>(&h)) return e->rate;
  const auto& w = std::get<WeibullHazard>(h);
  return w.scale * w.shape * std::pow(t, w.shape - 1.0);
}

double cumulative_hazard(double t, const BaselineHazard& h) {
  if (t <= 0.0) return 0.0;
  if (const auto* e = std::get_if<ExponentialHazard>(&h)) return e->rate * t;
  const auto& w = std::get<WeibullHazard>(h);
  return w.scale * std::pow(t, w.shape);
}

double inverse_cumulative_hazard(double y, const BaselineHazard& h) {
  if (!(y >= 0.0)) throw std::invalid_argument("inverse_cumulative_hazard: y must be >= 0");
  if (const auto* e = std::get_if<ExponentialHazard>(&h)) return y / e->rate;
  const auto& w = std::get<WeibullHazard>(h);
  return std::pow(y / w.scale, 1.0 / w.shape);
}

double expect_scalar(const CovariateLaw& law,
                     const std::function<double(const Vector&)>& g,
                     const QuadratureConfig& cfg) {
  return expect_impl<double>(law, g, cfg);
}

Vector expect_vector(const CovariateLaw& law,
                     const std::function<Vector(const Vector&)>& g,
                     const QuadratureConfig& cfg) {
  return expect_impl<Vector>(law, g, cfg);
}

Matrix expect_matrix(const CovariateLaw& law,
                     const std::function<Matrix(const Vector&)>& g,
                     const QuadratureConfig& cfg) {
  return expect_impl<Matrix>(law, g, cfg);
}

RiskMassMoments model_risk_mass_all(double t, const Vector& beta, const ModelSpec& spec,
                                    const QuadratureConfig& cfg) {
  const Index d = spec.dim();
  if (beta.size() != d)
    throw std::invalid_argument("beta dimension does not match the model");
  RiskMassMoments out;
  out.grad = Vector::Zero(d);
  out.hess = Matrix::Zero(d, d);
  if (t > spec.censoring.study_end) return out;

  const double tc = std::max(t, 0.0);
  const double censored_frac = std::exp(-spec.censoring.rate * tc);
  const double lam = cumulative_hazard(tc, spec.baseline);

  // Packed symmetric block [mass, grad'; grad, hess] in one expectation pass.
  const Matrix packed = expect_impl<Matrix>(
      spec.covariates,
      [&](const Vector& z) {
        const double w =
            std::exp(beta.dot(z) - lam * std::exp(spec.beta0.dot(z)));
        Matrix block(d + 1, d + 1);
        block(0, 0) = w;
        block.block(1, 0, d, 1) = w * z;
        block.block(0, 1, 1, d) = w * z.transpose();
        block.block(1, 1, d, d) = w * z * z.transpose();
        return block;
      },
      cfg);

  out.mass = censored_frac * packed(0, 0);
  out.grad = censored_frac * packed.block(1, 0, d, 1);
  out.hess = censored_frac * packed.block(1, 1, d, d);
  return out;
}

double model_risk_mass(double t, const Vector& beta, const ModelSpec& spec,
                       const QuadratureConfig& cfg) {
  const Index d = spec.dim();
  if (beta.size() != d)
    throw std::invalid_argument("beta dimension does not match the model");
  if (t > spec.censoring.study_end) return 0.0;
  const double tc = std::max(t, 0.0);
  const double lam = cumulative_hazard(tc, spec.baseline);
  const double ez = expect_scalar(
      spec.covariates,
      [&](const Vector& z) {
        return std::exp(beta.dot(z) - lam * std::exp(spec.beta0.dot(z)));
      },
      cfg);
  return std::exp(-spec.censoring.rate * tc) * ez;
}

Vector model_risk_mass_grad(double t, const Vector& beta, const ModelSpec& spec,
                            const QuadratureConfig& cfg) {
  return model_risk_mass_all(t, beta, spec, cfg).grad;
}

Matrix model_risk_mass_hess(double t, const Vector& beta, const ModelSpec& spec,
                            const QuadratureConfig& cfg) {
  return model_risk_mass_all(t, beta, spec, cfg).hess;
}

Matrix asymptotic_information(const ModelSpec& spec, const QuadratureConfig& cfg) {
  spec.validate();
  const Index d = spec.dim();
  const QuadratureConfig inner{std::min(cfg.rel_tol * 1e-2, 1e-8), 0.0, cfg.max_depth};
  const auto integrand = [&](double u) -> Matrix {
    const RiskMassMoments mm = model_risk_mass_all(u, spec.beta0, spec, inner);
    return (mm.hess - mm.grad * mm.grad.transpose() / mm.mass) *
           baseline_hazard(u, spec.baseline);
  };
  Matrix sigma = adaptive_integrate(integrand, 0.0, spec.censoring.study_end, cfg);
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  if (es.info() != Eigen::Success || !(es.eigenvalues()(0) > 0.0) ||
      es.eigenvalues()(0) <= es.eigenvalues()(d - 1) * 1e-12)
    throw std::domain_error(
        "asymptotic information is singular: the covariate law is degenerate "
        "for this model dimension");
  return sigma;
}

double prob_followup_to_study_end(const ModelSpec& spec) {
  spec.validate();
  const double t0 = spec.censoring.study_end;
  const double lam = cumulative_hazard(t0, spec.baseline);
  const double ez = expect_scalar(spec.covariates, [&](const Vector& z) {
    return std::exp(-lam * std::exp(spec.beta0.dot(z)));
  });
  return std::exp(-spec.censoring.rate * t0) * ez;
}

}  // namespace cox
