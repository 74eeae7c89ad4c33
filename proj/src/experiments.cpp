#include "cox/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

#include "cox/breslow.hpp"
#include "cox/stats.hpp"

namespace cox {

void ExperimentConfig::validate() const {
  spec.validate();
  if (n_grid.empty()) throw std::invalid_argument("n_grid: must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw std::invalid_argument("n_grid: sample sizes must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("n_grid: must be strictly ascending");
  }
  for (double p : p_list)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("p_list: moment orders must be finite and nonnegative");
  if (replications < 1) throw std::invalid_argument("replications: must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon: must be positive");
  if (workers < 1) throw std::invalid_argument("workers: must be >= 1");
}

std::uint64_t replication_stream(Index n_index, Index replication) {
  return (static_cast<std::uint64_t>(n_index + 1) << 32) |
         (static_cast<std::uint64_t>(replication) + 1);
}

namespace {

// Work-stealing loop over replications. Results land in per-replication
// slots and are reduced sequentially afterwards, so the output does not
// depend on the worker count.
void run_replications(Index total, int workers, const std::function<void(Index)>& body) {
  if (workers <= 1) {
    for (Index r = 0; r < total; ++r) body(r);
    return;
  }
  std::atomic<Index> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto loop = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const Index r = next.fetch_add(1);
      if (r >= total) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct ProgressTicker {
  const ProgressFn& fn;
  Index n;
  Index total;
  Index step;
  std::atomic<Index> done{0};
  std::mutex mutex;

  ProgressTicker(const ProgressFn& f, Index n_, Index total_)
      : fn(f), n(n_), total(total_), step(std::max<Index>(total_ / 10, 1)) {}

  void tick() {
    if (!fn) return;
    const Index k = ++done;
    if (k % step == 0 || k == total) {
      std::lock_guard<std::mutex> lock(mutex);
      fn(n, k, total);
    }
  }
};

void append_row(std::string& out, const MomentRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%s,%.17g,%.17g,%.17g,%lld\n",
                static_cast<long long>(row.n), row.p, row.quantity.c_str(), row.mc_mean,
                row.mc_se, row.event_freq, static_cast<long long>(row.failures));
  out += buf;
}

void check_failure_budget(const char* run, Index n, Index failures, Index total) {
  if (failures * 5 > total)
    throw std::runtime_error(std::string(run) + ": more than 20% of replications failed at n=" +
                             std::to_string(n) + " (" + std::to_string(failures) + "/" +
                             std::to_string(total) + ")");
}

}  // namespace

std::string MomentReport::to_csv() const {
  std::string out = "n,p,quantity,mc_mean,mc_se,event_freq,failures\n";
  for (const MomentRow& row : rows) append_row(out, row);
  return out;
}

void MomentReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open file for writing");
  out << to_csv();
  if (!out) throw CsvError(path + ": write failed");
}

std::string NormalityReport::to_csv() const {
  std::string out = "n,component,ks_stat,ks_pvalue,coverage,coverage_se,failures,small_n\n";
  char buf[256];
  for (const NormalityRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g,%.17g,%.17g,%lld,%d\n",
                  static_cast<long long>(row.n), static_cast<long long>(row.component),
                  row.ks_stat, row.ks_pvalue, row.coverage, row.coverage_se,
                  static_cast<long long>(row.failures), row.small_n ? 1 : 0);
    out += buf;
  }
  return out;
}

void NormalityReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw CsvError(path + ": cannot open file for writing");
  out << to_csv();
  if (!out) throw CsvError(path + ": write failed");
}

MomentReport run_beta_moments(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (cfg.p_list.empty()) throw std::invalid_argument("p_list: must be nonempty");
  const Matrix sigma = asymptotic_information(cfg.spec);
  const Index reps = cfg.replications;

  MomentReport report;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const Index n = cfg.n_grid[ni];
    struct Cell {
      bool fitted = false;
      bool event = false;
      double error_norm = 0.0;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(reps));
    ProgressTicker ticker(progress, n, reps);
    run_replications(reps, cfg.workers, [&](Index r) {
      const SeedSpec seed{cfg.master_seed, replication_stream(static_cast<Index>(ni), r)};
      const Dataset ds = simulate(cfg.spec, n, seed);
      try {
        const FitResult fr = fit(ds);
        if (fr.converged) {
          Cell cell;
          cell.fitted = true;
          cell.event = information_within_limit(fr, n, sigma, cfg.epsilon);
          cell.error_norm = (fr.beta_hat - cfg.spec.beta0).norm();
          cells[static_cast<std::size_t>(r)] = cell;
        }
      } catch (const FitError&) {
        // recorded as a failure
      }
      ticker.tick();
    });

    Index failures = 0;
    Index events = 0;
    for (const Cell& cell : cells) {
      if (!cell.fitted) ++failures;
      if (cell.event) ++events;
    }
    check_failure_budget("beta-moments", n, failures, reps);
    const Index fitted = reps - failures;
    const double freq =
        fitted > 0 ? static_cast<double>(events) / static_cast<double>(fitted) : 0.0;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (double p : cfg.p_list) {
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(fitted));
      for (const Cell& cell : cells)
        if (cell.fitted)
          values.push_back(cell.event ? std::pow(root_n * cell.error_norm, p) : 0.0);
      const MeanSe ms = mean_and_se(values);
      report.rows.push_back({n, p, "scaled_beta_error", ms.mean, ms.se, freq, failures});
    }
  }
  return report;
}

MomentReport run_phi_moments(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (cfg.p_list.empty()) throw std::invalid_argument("p_list: must be nonempty");
  const double t_end = cfg.spec.censoring.study_end;
  const Index reps = cfg.replications;
  const auto truth = [&](double t) { return model_risk_mass(t, cfg.spec.beta0, cfg.spec); };

  MomentReport report;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const Index n = cfg.n_grid[ni];
    std::vector<double> sups(static_cast<std::size_t>(reps), 0.0);
    ProgressTicker ticker(progress, n, reps);
    run_replications(reps, cfg.workers, [&](Index r) {
      const SeedSpec seed{cfg.master_seed, replication_stream(static_cast<Index>(ni), r)};
      const Dataset ds = simulate(cfg.spec, n, seed);
      const StepFunction curve = risk_mass_curve(ds, cfg.spec.beta0);
      sups[static_cast<std::size_t>(r)] =
          sup_distance(curve, truth, Monotonicity::nonincreasing, 0.0, t_end);
      ticker.tick();
    });

    const double root_n = std::sqrt(static_cast<double>(n));
    for (double p : cfg.p_list) {
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(reps));
      for (double s : sups) values.push_back(std::pow(root_n * s, p));
      const MeanSe ms = mean_and_se(values);
      report.rows.push_back({n, p, "scaled_risk_mass_sup", ms.mean, ms.se, 1.0, 0});
    }
  }
  return report;
}

MomentReport run_breslow_moments(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (cfg.p_list.empty()) throw std::invalid_argument("p_list: must be nonempty");
  const Matrix sigma = asymptotic_information(cfg.spec);
  const double t_end = cfg.spec.censoring.study_end;
  const double mass_at_end = model_risk_mass(t_end, cfg.spec.beta0, cfg.spec);
  const double half_mass = mass_at_end / 2.0;
  const Index reps = cfg.replications;
  const auto truth_mass = [&](double t) { return model_risk_mass(t, cfg.spec.beta0, cfg.spec); };
  const auto truth_cumhaz = [&](double t) { return cumulative_hazard(t, cfg.spec.baseline); };

  MomentReport report;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const Index n = cfg.n_grid[ni];
    struct Cell {
      bool fitted = false;
      bool event = false;
      double sup = 0.0;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(reps));
    ProgressTicker ticker(progress, n, reps);
    run_replications(reps, cfg.workers, [&](Index r) {
      const SeedSpec seed{cfg.master_seed, replication_stream(static_cast<Index>(ni), r)};
      const Dataset ds = simulate(cfg.spec, n, seed);
      try {
        const FitResult fr = fit(ds);
        if (!fr.converged) {
          ticker.tick();
          return;
        }
        Cell cell;
        cell.fitted = true;
        const bool mass_close =
            std::abs(risk_mass(t_end, cfg.spec.beta0, ds) - mass_at_end) <= half_mass;
        const StepFunction curve = risk_mass_curve(ds, fr.beta_hat);
        const bool curve_close =
            sup_distance(curve, truth_mass, Monotonicity::nonincreasing, 0.0, t_end) <=
            half_mass;
        const bool info_close = information_within_limit(fr, n, sigma, cfg.epsilon);
        cell.event = mass_close && curve_close && info_close;
        const StepFunction cumhaz = breslow_estimator(ds, fr.beta_hat);
        cell.sup =
            sup_distance(cumhaz, truth_cumhaz, Monotonicity::nondecreasing, 0.0, t_end);
        cells[static_cast<std::size_t>(r)] = cell;
      } catch (const FitError&) {
        // recorded as a failure
      }
      ticker.tick();
    });

    Index failures = 0;
    Index events = 0;
    for (const Cell& cell : cells) {
      if (!cell.fitted) ++failures;
      if (cell.event) ++events;
    }
    check_failure_budget("breslow-moments", n, failures, reps);
    const Index fitted = reps - failures;
    const double freq =
        fitted > 0 ? static_cast<double>(events) / static_cast<double>(fitted) : 0.0;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (double p : cfg.p_list) {
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(fitted));
      for (const Cell& cell : cells)
        if (cell.fitted)
          values.push_back(cell.event ? std::pow(root_n * cell.sup, p) : 0.0);
      const MeanSe ms = mean_and_se(values);
      report.rows.push_back({n, p, "scaled_cumhaz_sup", ms.mean, ms.se, freq, failures});
    }
  }
  return report;
}

NormalityReport run_normality(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const Matrix sigma = asymptotic_information(cfg.spec);
  // sqrt(n)(beta_hat - beta0) has limiting covariance sigma^{-1} (inverse
  // information), so multiplying by sigma^{1/2} yields standard normal
  // components.
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  const Matrix sqrt_sigma = es.operatorSqrt();
  const Index d = cfg.spec.dim();
  const Index reps = cfg.replications;

  NormalityReport report;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const Index n = cfg.n_grid[ni];
    struct Cell {
      bool fitted = false;
      Vector standardized;
      std::vector<char> covered;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(reps));
    ProgressTicker ticker(progress, n, reps);
    run_replications(reps, cfg.workers, [&](Index r) {
      const SeedSpec seed{cfg.master_seed, replication_stream(static_cast<Index>(ni), r)};
      const Dataset ds = simulate(cfg.spec, n, seed);
      try {
        const FitResult fr = fit(ds);
        if (!fr.converged) {
          ticker.tick();
          return;
        }
        Cell cell;
        cell.fitted = true;
        cell.standardized = std::sqrt(static_cast<double>(n)) *
                            (sqrt_sigma * (fr.beta_hat - cfg.spec.beta0));
        cell.covered.assign(static_cast<std::size_t>(d), 0);
        Eigen::SelfAdjointEigenSolver<Matrix> ies(fr.information);
        if (ies.info() == Eigen::Success && ies.eigenvalues()(0) > 0.0) {
          const Matrix inv_info = ies.operatorInverseSqrt() * ies.operatorInverseSqrt();
          for (Index c = 0; c < d; ++c) {
            const double half_width = z_975 * std::sqrt(inv_info(c, c));
            cell.covered[static_cast<std::size_t>(c)] =
                std::abs(fr.beta_hat(c) - cfg.spec.beta0(c)) <= half_width ? 1 : 0;
          }
        }
        cells[static_cast<std::size_t>(r)] = cell;
      } catch (const FitError&) {
        // recorded as a failure
      }
      ticker.tick();
    });

    Index failures = 0;
    for (const Cell& cell : cells)
      if (!cell.fitted) ++failures;
    check_failure_budget("normality", n, failures, reps);

    for (Index c = 0; c < d; ++c) {
      std::vector<double> draws;
      draws.reserve(static_cast<std::size_t>(reps - failures));
      Index covered = 0;
      for (const Cell& cell : cells) {
        if (!cell.fitted) continue;
        draws.push_back(cell.standardized(c));
        covered += cell.covered[static_cast<std::size_t>(c)];
      }
      const KsResult ks = ks_test(draws, [](double x) { return normal_cdf(x); });
      const double m = static_cast<double>(draws.size());
      const double cover_rate = m > 0 ? static_cast<double>(covered) / m : 0.0;
      const double cover_se = m > 0 ? std::sqrt(cover_rate * (1.0 - cover_rate) / m) : 0.0;
      report.rows.push_back(
          {n, c + 1, ks.statistic, ks.p_value, cover_rate, cover_se, failures, n < 400});
    }
  }
  return report;
}

InequalityReport run_inequality_checks(const ExperimentConfig& cfg,
                                       const ProgressFn& progress) {
  cfg.validate();
  if (cfg.p_list.empty()) throw std::invalid_argument("p_list: must be nonempty");
  const auto* law = std::get_if<FiniteDiscreteCovariates>(&cfg.spec.covariates);
  if (law == nullptr)
    throw std::invalid_argument(
        "inequality checks require a finite-discrete covariate law (closed-form caps)");
  const Index d = cfg.spec.dim();
  const Index reps = cfg.replications;

  // Closed-form cap per component and moment order:
  //   E[ Z_c^{2p} exp(p beta0'Z) ].
  const auto cap_for = [&](Index c, double p) {
    double cap = 0.0;
    for (Index j = 0; j < law->probs.size(); ++j)
      cap += law->probs(j) * std::pow(law->atoms(j, c), 2.0 * p) *
             std::exp(p * cfg.spec.beta0.dot(law->atoms.row(j).transpose()));
    return cap;
  };

  InequalityReport report;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const Index n = cfg.n_grid[ni];
    struct Cell {
      Vector weighted_square;  // (1/n) sum_i Z_ic^2 exp(beta0'Z_i) per component
      Index violations = 0;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(reps));
    ProgressTicker ticker(progress, n, reps);
    run_replications(reps, cfg.workers, [&](Index r) {
      const SeedSpec seed{cfg.master_seed, replication_stream(static_cast<Index>(ni), r)};
      const Dataset ds = simulate(cfg.spec, n, seed);
      Cell cell;
      cell.weighted_square = Vector::Zero(d);
      for (Index i = 0; i < n; ++i) {
        const double rr = std::exp(cfg.spec.beta0.dot(ds.covariate_row(i)));
        for (Index c = 0; c < d; ++c)
          cell.weighted_square(c) += ds.covariates()(i, c) * ds.covariates()(i, c) * rr;
      }
      cell.weighted_square /= static_cast<double>(n);

      // Pointwise cap on the squared gradient-to-mass ratio at every
      // observed time; exact up to rounding, hence the relative slack.
      const RiskSetCurves curves = risk_set_curves(ds, cfg.spec.beta0, false);
      for (Index k = 0; k < curves.times.size(); ++k)
        for (Index c = 0; c < d; ++c) {
          const double lhs =
              curves.grad_over_mass(k, c) * curves.grad_over_mass(k, c) * curves.mass(k);
          const double rhs = cell.weighted_square(c);
          if (lhs > rhs * (1.0 + 1e-12) + 1e-300) ++cell.violations;
        }
      cells[static_cast<std::size_t>(r)] = cell;
      ticker.tick();
    });

    Index total_violations = 0;
    for (Index r = 0; r < reps; ++r) {
      const Cell& cell = cells[static_cast<std::size_t>(r)];
      if (cell.violations > 0 && !report.first_violation.has_value())
        report.first_violation =
            SeedSpec{cfg.master_seed, replication_stream(static_cast<Index>(ni), r)};
      total_violations += cell.violations;
    }
    report.ratio_bound_violations += total_violations;
    report.detail.rows.push_back({n, 0.0, "risk_ratio_bound_violations",
                                  static_cast<double>(total_violations), 0.0, 1.0, 0});

    for (Index c = 0; c < d; ++c) {
      for (double p : cfg.p_list) {
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(reps));
        for (const Cell& cell : cells)
          values.push_back(std::pow(cell.weighted_square(c), p));
        const MeanSe ms = mean_and_se(values);
        const double cap = cap_for(c, p);
        const std::string tag = "z" + std::to_string(c + 1);
        report.detail.rows.push_back(
            {n, p, "covariate_moment[" + tag + "]", ms.mean, ms.se, 1.0, 0});
        report.detail.rows.push_back(
            {n, p, "covariate_moment_cap[" + tag + "]", cap, 0.0, 1.0, 0});
        if (ms.mean > cap + 3.0 * ms.se) report.moment_bounds_respected = false;
      }
    }
  }
  return report;
}

}  // namespace cox
