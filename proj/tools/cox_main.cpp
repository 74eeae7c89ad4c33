#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cox/breslow.hpp"
#include "cox/dgp.hpp"
#include "cox/experiments.hpp"
#include "cox/json_io.hpp"
#include "cox/mple.hpp"

namespace {

cox::Vector parse_init_list(const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string piece =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(piece, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("--init: expected comma-separated numbers");
    }
    if (used != piece.size())
      throw std::invalid_argument("--init: expected comma-separated numbers");
    values.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  cox::Vector out(static_cast<cox::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<cox::Index>(i)) = values[i];
  return out;
}

int run_fit(const std::string& input, const std::string& output, double tol, int max_iter,
            const std::string& init) {
  const cox::Dataset ds = cox::load_csv(input);
  cox::SolverConfig cfg;
  cfg.tolerance = tol;
  cfg.max_iterations = max_iter;
  if (!init.empty()) cfg.initial = parse_init_list(init);
  const cox::FitResult fit = cox::fit(ds, cfg);
  cox::write_json_file(cox::to_json(fit), output);
  if (!fit.converged) {
    std::fprintf(stderr, "fit: did not converge within %d iterations (score norm %.3e)\n",
                 max_iter, fit.score_norm);
    return 4;
  }
  return 0;
}

int run_breslow(const std::string& input, const std::string& fit_path,
                const std::string& output) {
  const cox::Dataset ds = cox::load_csv(input);
  const cox::FitResult fit = cox::fit_result_from_json(cox::read_json_file(fit_path));
  if (!fit.converged) {
    std::fprintf(stderr, "breslow: the fit did not converge; refusing to extrapolate\n");
    return 2;
  }
  if (fit.beta_hat.size() != ds.dim()) {
    std::fprintf(stderr,
                 "breslow: fit has %lld coefficients but the dataset has %lld covariates\n",
                 static_cast<long long>(fit.beta_hat.size()),
                 static_cast<long long>(ds.dim()));
    return 1;
  }
  cox::write_csv(cox::breslow_estimator(ds, fit.beta_hat), output);
  return 0;
}

int run_simulate(const std::string& spec_path, long long n, unsigned long long seed,
                 unsigned long long stream, const std::string& output) {
  const cox::ModelSpec spec = cox::model_spec_from_json(cox::read_json_file(spec_path));
  const cox::Dataset ds =
      cox::simulate(spec, static_cast<cox::Index>(n), cox::SeedSpec{seed, stream});
  cox::write_csv(ds, output);
  return 0;
}

int run_experiment(const std::string& run_name, const std::string& config_path,
                   const std::string& out_dir, int workers) {
  cox::ExperimentConfig cfg =
      cox::experiment_config_from_json(cox::read_json_file(config_path));
  cfg.workers = workers;
  std::filesystem::create_directories(out_dir);
  const auto out_path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  const cox::ProgressFn progress = [&](cox::Index n, cox::Index done, cox::Index total) {
    std::fprintf(stderr, "[%s] n=%lld: %lld/%lld replications\n", run_name.c_str(),
                 static_cast<long long>(n), static_cast<long long>(done),
                 static_cast<long long>(total));
  };

  std::vector<std::string> outputs;
  int exit_code = 0;
  if (run_name == "beta-moments") {
    const auto report = cox::run_beta_moments(cfg, progress);
    report.write_csv(out_path("beta_moments.csv"));
    outputs.push_back("beta_moments.csv");
  } else if (run_name == "phi-moments") {
    const auto report = cox::run_phi_moments(cfg, progress);
    report.write_csv(out_path("phi_moments.csv"));
    outputs.push_back("phi_moments.csv");
  } else if (run_name == "breslow-moments") {
    const auto report = cox::run_breslow_moments(cfg, progress);
    report.write_csv(out_path("breslow_moments.csv"));
    outputs.push_back("breslow_moments.csv");
  } else if (run_name == "normality") {
    const auto report = cox::run_normality(cfg, progress);
    report.write_csv(out_path("normality.csv"));
    outputs.push_back("normality.csv");
  } else if (run_name == "inequalities") {
    const auto report = cox::run_inequality_checks(cfg, progress);
    report.detail.write_csv(out_path("inequalities.csv"));
    outputs.push_back("inequalities.csv");
    if (!report.passed()) {
      if (report.first_violation.has_value()) {
        std::fprintf(stderr,
                     "inequalities: pointwise bound violated; reproduce with master_seed=%llu "
                     "stream_id=%llu\n",
                     static_cast<unsigned long long>(report.first_violation->master_seed),
                     static_cast<unsigned long long>(report.first_violation->stream_id));
      } else {
        std::fprintf(stderr, "inequalities: Monte Carlo moment exceeded its closed-form cap\n");
      }
      exit_code = 1;
    }
  } else {
    std::fprintf(stderr, "experiment: unknown run \"%s\"\n", run_name.c_str());
    return 1;
  }
  cox::write_run_manifest(cfg, run_name, out_dir, outputs);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proportional-hazards estimation and Monte Carlo verification"};
  app.require_subcommand(1);

  auto* fit_cmd = app.add_subcommand("fit", "Maximum partial likelihood fit");
  std::string fit_input, fit_output, fit_init;
  double fit_tol = 1e-8;
  int fit_max_iter = 50;
  fit_cmd->add_option("--input", fit_input, "Input CSV (time,status,z1,...,zd)")->required();
  fit_cmd->add_option("--output", fit_output, "Output JSON for the fit result")->required();
  fit_cmd->add_option("--tol", fit_tol, "Convergence tolerance on the score sup-norm");
  fit_cmd->add_option("--max-iter", fit_max_iter, "Iteration budget");
  fit_cmd->add_option("--init", fit_init, "Comma-separated initial coefficients");

  auto* breslow_cmd =
      app.add_subcommand("breslow", "Cumulative baseline hazard from a fitted model");
  std::string br_input, br_fit, br_output;
  breslow_cmd->add_option("--input", br_input, "Input CSV (time,status,z1,...,zd)")->required();
  breslow_cmd->add_option("--fit", br_fit, "Fit-result JSON")->required();
  breslow_cmd->add_option("--output", br_output, "Output step-function CSV")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Draw a synthetic right-censored sample");
  std::string sim_spec, sim_output;
  long long sim_n = 0;
  unsigned long long sim_seed = 0, sim_stream = 0;
  sim_cmd->add_option("--spec", sim_spec, "Model specification JSON")->required();
  sim_cmd->add_option("--n", sim_n, "Sample size")->required();
  sim_cmd->add_option("--seed", sim_seed, "Master seed")->required();
  sim_cmd->add_option("--stream", sim_stream, "Stream id (default 0)");
  sim_cmd->add_option("--output", sim_output, "Output CSV")->required();

  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo verification runs");
  std::string exp_run, exp_config, exp_out_dir;
  int exp_workers = 1;
  exp_cmd
      ->add_option("run", exp_run,
                   "One of beta-moments, phi-moments, breslow-moments, normality, inequalities")
      ->required();
  exp_cmd->add_option("--config", exp_config, "Experiment configuration JSON")->required();
  exp_cmd->add_option("--out-dir", exp_out_dir, "Directory for CSV reports and the manifest")
      ->required();
  exp_cmd->add_option("--workers", exp_workers, "Worker threads (output is identical for any k)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed())
      return run_fit(fit_input, fit_output, fit_tol, fit_max_iter, fit_init);
    if (breslow_cmd->parsed()) return run_breslow(br_input, br_fit, br_output);
    if (sim_cmd->parsed())
      return run_simulate(sim_spec, sim_n, sim_seed, sim_stream, sim_output);
    if (exp_cmd->parsed())
      return run_experiment(exp_run, exp_config, exp_out_dir, exp_workers);
  } catch (const cox::FitError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind) {
      case cox::FitErrorKind::monotone_likelihood:
        return 2;
      case cox::FitErrorKind::singular_information:
        return 3;
      case cox::FitErrorKind::no_events:
        return 1;
    }
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
