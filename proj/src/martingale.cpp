#include "cox/martingale.hpp"

#include <cmath>
#include <stdexcept>

#include "cox/partial_likelihood.hpp"

namespace cox {

ProcessBundle::ProcessBundle(Dataset data, ModelSpec model)
    : data_(std::move(data)), model_(std::move(model)) {
  model_.validate();
  if (data_.dim() != model_.dim())
    throw std::invalid_argument("dataset and model dimensions differ");
  relative_risk_ = (data_.covariates() * model_.beta0).array().exp().matrix();
}

double ProcessBundle::counting(Index i, double t) const {
  return data_.status_of(i) == 1 && data_.time(i) <= t ? 1.0 : 0.0;
}

double ProcessBundle::at_risk(Index i, double t) const {
  return data_.time(i) >= t ? 1.0 : 0.0;
}

double ProcessBundle::compensator(Index i, double t) const {
  const double capped = std::min(t, data_.time(i));
  return relative_risk_(i) * cumulative_hazard(capped, model_.baseline);
}

double ProcessBundle::residual(Index i, double t) const {
  return counting(i, t) - compensator(i, t);
}

double ProcessBundle::residual_sum(double t) const {
  double acc = 0.0;
  for (Index i = 0; i < size(); ++i) acc += residual(i, t);
  return acc;
}

namespace {

// Shared piecewise walk: between consecutive distinct observed times the
// risk set is constant, so integrals against dLambda0 are exact sums of
// closed-form increments. body(k, delta) receives the piece's risk-set
// suffix index and its Lambda0 increment.
template <class Body>
void walk_pieces(const Dataset& ds, const ModelSpec& spec, double t,
                 const Vector& distinct_times, const Body& body) {
  double prev = 0.0;
  for (Index k = 0; k < distinct_times.size(); ++k) {
    const double hi = std::min(distinct_times(k), t);
    if (hi <= prev) break;
    const double delta =
        cumulative_hazard(hi, spec.baseline) - cumulative_hazard(prev, spec.baseline);
    body(k, delta);
    prev = distinct_times(k);
  }
}

}  // namespace

double compensator_identity_gap(const Dataset& ds, const ModelSpec& spec, double t) {
  spec.validate();
  if (ds.dim() != spec.dim())
    throw std::invalid_argument("dataset and model dimensions differ");
  const Index n = ds.size();
  const Index d = ds.dim();
  const RiskSetCurves curves = risk_set_curves(ds, spec.beta0, false);

  Vector total = Vector::Zero(d);
  walk_pieces(ds, spec, t, curves.times, [&](Index k, double delta) {
    // Direct per-subject sums, deliberately not reusing the sweep's scale.
    double s0 = 0.0;
    Vector s1 = Vector::Zero(d);
    for (Index i = 0; i < n; ++i) {
      if (ds.time(i) < curves.times(k)) continue;
      const double rr = std::exp(spec.beta0.dot(ds.covariate_row(i)));
      s0 += rr;
      s1 += rr * ds.covariate_row(i).transpose();
    }
    total += (s1 - curves.grad_over_mass.row(k).transpose() * s0) * delta;
  });
  return total.cwiseAbs().maxCoeff();
}

Matrix predictable_variation(const Dataset& ds, const ModelSpec& spec, double t) {
  spec.validate();
  if (ds.dim() != spec.dim())
    throw std::invalid_argument("dataset and model dimensions differ");
  const Index n = ds.size();
  const Index d = ds.dim();

  Vector distinct(n);
  Index count = 0;
  for (Index i = 0; i < n; ++i)
    if (i == 0 || ds.time(i) != ds.time(i - 1)) distinct(count++) = ds.time(i);
  distinct.conservativeResize(count);

  Matrix total = Matrix::Zero(d, d);
  walk_pieces(ds, spec, t, distinct, [&](Index k, double delta) {
    double s0 = 0.0;
    Vector s1 = Vector::Zero(d);
    Matrix s2 = Matrix::Zero(d, d);
    for (Index i = 0; i < n; ++i) {
      if (ds.time(i) < distinct(k)) continue;
      const double rr = std::exp(spec.beta0.dot(ds.covariate_row(i)));
      s0 += rr;
      s1 += rr * ds.covariate_row(i).transpose();
      s2.noalias() +=
          rr * ds.covariate_row(i).transpose() * ds.covariate_row(i);
    }
    total += (s2 - s1 * s1.transpose() / s0) * (delta / static_cast<double>(n));
  });
  return total;
}

Vector score_from_counting(const Dataset& ds, const ModelSpec& spec, double t) {
  spec.validate();
  if (ds.dim() != spec.dim())
    throw std::invalid_argument("dataset and model dimensions differ");
  Vector acc = Vector::Zero(ds.dim());
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.status_of(i) != 1 || ds.time(i) > t) continue;
    const double mass = risk_mass(ds.time(i), spec.beta0, ds);
    const Vector grad = risk_mass_grad(ds.time(i), spec.beta0, ds);
    acc += ds.covariate_row(i).transpose() - grad / mass;
  }
  return acc;
}

}  // namespace cox
