#include "cox/partial_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cox {

namespace {

void check_beta(const Vector& beta, const Dataset& ds) {
  if (beta.size() != ds.dim())
    throw std::invalid_argument("beta dimension does not match the dataset");
  if (!beta.allFinite()) throw std::invalid_argument("beta must be finite");
}

// Running suffix accumulator for sum exp(eta), sum Z exp(eta), sum ZZ' exp(eta),
// stored relative to the suffix maximum of eta so that s stays in [1, n].
struct ShiftedSums {
  double shift = -std::numeric_limits<double>::infinity();
  double s = 0.0;
  Vector v;
  Matrix q;
  bool with_q = false;

  void init(Index d, bool hess) {
    with_q = hess;
    v = Vector::Zero(d);
    if (hess) q = Matrix::Zero(d, d);
  }

  void absorb(double eta, const Eigen::MatrixXd::ConstRowXpr& z) {
    if (eta > shift) {
      if (s > 0.0) {
        const double c = std::exp(shift - eta);
        s *= c;
        v *= c;
        if (with_q) q *= c;
      }
      shift = eta;
    }
    const double w = std::exp(eta - shift);
    s += w;
    v.noalias() += w * z.transpose();
    if (with_q) q.noalias() += w * z.transpose() * z;
  }

  double log_sum() const { return shift + std::log(s); }
};

}  // namespace

double risk_mass(double t, const Vector& beta, const Dataset& ds) {
  check_beta(beta, ds);
  double acc = 0.0;
  for (Index i = 0; i < ds.size(); ++i)
    if (ds.time(i) >= t) acc += std::exp(beta.dot(ds.covariate_row(i)));
  return acc / static_cast<double>(ds.size());
}

Vector risk_mass_grad(double t, const Vector& beta, const Dataset& ds) {
  check_beta(beta, ds);
  Vector acc = Vector::Zero(ds.dim());
  for (Index i = 0; i < ds.size(); ++i)
    if (ds.time(i) >= t)
      acc += std::exp(beta.dot(ds.covariate_row(i))) * ds.covariate_row(i).transpose();
  return acc / static_cast<double>(ds.size());
}

Matrix risk_mass_hess(double t, const Vector& beta, const Dataset& ds) {
  check_beta(beta, ds);
  Matrix acc = Matrix::Zero(ds.dim(), ds.dim());
  for (Index i = 0; i < ds.size(); ++i)
    if (ds.time(i) >= t) {
      const double w = std::exp(beta.dot(ds.covariate_row(i)));
      acc.noalias() += w * ds.covariate_row(i).transpose() * ds.covariate_row(i);
    }
  return acc / static_cast<double>(ds.size());
}

RiskSetCurves risk_set_curves(const Dataset& ds, const Vector& beta, bool with_hessian) {
  check_beta(beta, ds);
  const Index n = ds.size();
  const Index d = ds.dim();
  const Vector eta = ds.covariates() * beta;

  Index distinct = 1;
  for (Index i = 1; i < n; ++i)
    if (ds.time(i) != ds.time(i - 1)) ++distinct;

  RiskSetCurves out;
  out.times.resize(distinct);
  out.mass.resize(distinct);
  out.log_sum.resize(distinct);
  out.grad_over_mass.resize(distinct, d);
  if (with_hessian) out.hess_over_mass.resize(static_cast<std::size_t>(distinct));

  ShiftedSums sums;
  sums.init(d, with_hessian);

  Index k = distinct - 1;
  Index i = n - 1;
  while (i >= 0) {
    Index j = i;
    while (j > 0 && ds.time(j - 1) == ds.time(i)) --j;
    for (Index r = i; r >= j; --r) sums.absorb(eta(r), ds.covariate_row(r));
    out.times(k) = ds.time(i);
    out.log_sum(k) = sums.log_sum();
    out.mass(k) = std::exp(sums.log_sum() - std::log(static_cast<double>(n)));
    out.grad_over_mass.row(k) = (sums.v / sums.s).transpose();
    if (with_hessian) out.hess_over_mass[static_cast<std::size_t>(k)] = sums.q / sums.s;
    --k;
    i = j - 1;
  }
  return out;
}

Index RiskSetCurves::risk_index(double t) const {
  const double* begin = times.data();
  const double* end = begin + times.size();
  return std::lower_bound(begin, end, t) - begin;
}

double RiskSetCurves::mass_at(double t) const {
  const Index k = risk_index(t);
  return k == times.size() ? 0.0 : mass(k);
}

Vector RiskSetCurves::grad_at(double t) const {
  const Index k = risk_index(t);
  if (k == times.size()) return Vector::Zero(grad_over_mass.cols());
  return grad_over_mass.row(k).transpose() * mass(k);
}

Matrix RiskSetCurves::hess_at(double t) const {
  if (hess_over_mass.empty())
    throw std::logic_error("risk_set_curves was built without Hessians");
  const Index k = risk_index(t);
  const Index d = grad_over_mass.cols();
  if (k == times.size()) return Matrix::Zero(d, d);
  return hess_over_mass[static_cast<std::size_t>(k)] * mass(k);
}

LikelihoodEval evaluate_partial_likelihood(const Vector& beta, const Dataset& ds) {
  check_beta(beta, ds);
  if (ds.num_events() == 0)
    throw std::invalid_argument("partial likelihood undefined: no uncensored observations");
  const Index n = ds.size();
  const Index d = ds.dim();
  const Vector eta = ds.covariates() * beta;

  LikelihoodEval out;
  out.score = Vector::Zero(d);
  out.information = Matrix::Zero(d, d);

  ShiftedSums sums;
  sums.init(d, true);

  Index i = n - 1;
  while (i >= 0) {
    Index j = i;
    while (j > 0 && ds.time(j - 1) == ds.time(i)) --j;
    for (Index r = i; r >= j; --r) sums.absorb(eta(r), ds.covariate_row(r));
    const double logsum = sums.log_sum();
    const Vector ratio = sums.v / sums.s;
    const Matrix hess_ratio = sums.q / sums.s;
    for (Index r = j; r <= i; ++r) {
      if (ds.status_of(r) != 1) continue;
      out.value += eta(r) - logsum;
      out.score += ds.covariate_row(r).transpose() - ratio;
      out.information += hess_ratio - ratio * ratio.transpose();
    }
    i = j - 1;
  }
  return out;
}

double log_partial_likelihood(const Vector& beta, const Dataset& ds) {
  check_beta(beta, ds);
  if (ds.num_events() == 0)
    throw std::invalid_argument("partial likelihood undefined: no uncensored observations");
  const Index n = ds.size();
  const Vector eta = ds.covariates() * beta;

  double value = 0.0;
  double shift = -std::numeric_limits<double>::infinity();
  double s = 0.0;
  Index i = n - 1;
  while (i >= 0) {
    Index j = i;
    while (j > 0 && ds.time(j - 1) == ds.time(i)) --j;
    for (Index r = i; r >= j; --r) {
      const double e = eta(r);
      if (e > shift) {
        if (s > 0.0) s *= std::exp(shift - e);
        shift = e;
      }
      s += std::exp(e - shift);
    }
    const double logsum = shift + std::log(s);
    for (Index r = j; r <= i; ++r)
      if (ds.status_of(r) == 1) value += eta(r) - logsum;
    i = j - 1;
  }
  return value;
}

Vector score(const Vector& beta, const Dataset& ds) {
  return evaluate_partial_likelihood(beta, ds).score;
}

Matrix information(const Vector& beta, const Dataset& ds) {
  return evaluate_partial_likelihood(beta, ds).information;
}

Vector score_up_to(double t, const Vector& beta, const Dataset& ds) {
  check_beta(beta, ds);
  const RiskSetCurves curves = risk_set_curves(ds, beta, false);
  Vector acc = Vector::Zero(ds.dim());
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.status_of(i) != 1 || ds.time(i) > t) continue;
    const Index k = curves.risk_index(ds.time(i));
    acc += ds.covariate_row(i).transpose() - curves.grad_over_mass.row(k).transpose();
  }
  return acc;
}

}  // namespace cox
