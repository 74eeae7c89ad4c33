#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cox/dgp.hpp"
#include "cox/mple.hpp"

namespace cox {

struct ExperimentConfig {
  ModelSpec spec;
  std::vector<Index> n_grid;   // ascending sample sizes
  std::vector<double> p_list;  // moment orders
  Index replications = 100;
  std::uint64_t master_seed = 0;
  double epsilon = 0.5;  // threshold for the information-closeness event
  int workers = 1;

  void validate() const;
};

// One aggregated Monte Carlo cell. mc_mean/mc_se describe the gated moment
// (the tracked statistic is zeroed outside its event, mirroring how the
// bounded-moment statements are phrased); event_freq is the event frequency
// among replications that produced an estimate; failures counts replications
// whose fit did not converge.
struct MomentRow {
  Index n = 0;
  double p = 0.0;
  std::string quantity;
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double event_freq = 0.0;
  Index failures = 0;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

struct NormalityRow {
  Index n = 0;
  Index component = 0;
  double ks_stat = 0.0;
  double ks_pvalue = 0.0;
  double coverage = 0.0;     // 95% Wald interval empirical coverage
  double coverage_se = 0.0;  // binomial standard error
  Index failures = 0;
  bool small_n = false;  // below the range where the limit is asserted
};

struct NormalityReport {
  std::vector<NormalityRow> rows;
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

struct InequalityReport {
  MomentReport detail;
  Index ratio_bound_violations = 0;           // pointwise risk-ratio bound breaches
  std::optional<SeedSpec> first_violation;    // reproduction handle, if any
  bool moment_bounds_respected = true;        // MC means inside closed-form caps
  bool passed() const {
    return ratio_bound_violations == 0 && moment_bounds_respected;
  }
};

// Optional progress hook: (n, completed replications, total replications).
using ProgressFn = std::function<void(Index, Index, Index)>;

// E[ (sqrt(n) |beta_hat - beta0|_2)^p ] gated on the information-closeness
// event, per n in the grid. Throws std::runtime_error when more than 20% of
// replications at some n fail to fit.
MomentReport run_beta_moments(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// E[ (sqrt(n) sup_t |risk-mass curve - model risk mass|)^p ]; no gating, no
// fitting, so failures is always 0.
MomentReport run_phi_moments(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// E[ (sqrt(n) sup_{[0,T0)} |Breslow - Lambda0|)^p ] gated on the joint event
// (risk mass at the study end close, curve uniformly close, information
// close).
MomentReport run_breslow_moments(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// Componentwise KS tests of sqrt(n) sigma^{1/2} (beta_hat - beta0) against
// the standard normal (sigma is the information limit, so sigma^{-1} is the
// covariance of the limit law), plus 95% Wald coverage.
NormalityReport run_normality(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// Pointwise risk-ratio bound and closed-form covariate moment caps; requires
// a finite-discrete covariate law.
InequalityReport run_inequality_checks(const ExperimentConfig& cfg,
                                       const ProgressFn& progress = {});

// Stream id layout shared by every run: high word indexes the grid position,
// low word the replication.
std::uint64_t replication_stream(Index n_index, Index replication);

}  // namespace cox
