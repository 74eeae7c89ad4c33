#pragma once

#include "cox/population.hpp"
#include "cox/survival_data.hpp"

namespace cox {

// Per-subject counting processes under a known generating model: the event
// counter N_i, the at-risk indicator Y_i, and the compensator
// A_i(t) = exp(beta0'Z_i) * Lambda0(min(t, T_i)); M_i = N_i - A_i is the
// residual that should behave like a mean-zero martingale.
class ProcessBundle {
 public:
  ProcessBundle(Dataset data, ModelSpec model);

  Index size() const { return data_.size(); }
  const Dataset& data() const { return data_; }

  double counting(Index i, double t) const;
  double at_risk(Index i, double t) const;
  double compensator(Index i, double t) const;
  double residual(Index i, double t) const;
  double residual_sum(double t) const;  // sum_i M_i(t)

 private:
  Dataset data_;
  ModelSpec model_;
  Vector relative_risk_;  // exp(beta0'Z_i)
};

// Max-abs entry of sum_i integral_0^t (Z_i - grad/mass ratio) dA_i, the
// quantity that replacing per-event covariates by the risk-set average makes
// vanish identically. Exact piecewise integration between observed times;
// any nonzero residue is floating-point noise.
double compensator_identity_gap(const Dataset& ds, const ModelSpec& spec, double t);

// Predictable variation of the normalized score up to t: the exact integral
// of the risk-set covariance profile against the baseline hazard increments.
Matrix predictable_variation(const Dataset& ds, const ModelSpec& spec, double t);

// Score at beta0 truncated at t, reassembled from per-event counting
// increments; agrees with score_up_to by construction on a different code
// path.
Vector score_from_counting(const Dataset& ds, const ModelSpec& spec, double t);

}  // namespace cox
