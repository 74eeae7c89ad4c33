#include <cmath>
#include <stdexcept>
#include <string>

#include "cox/json_io.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cox;
using namespace cox_test;
using nlohmann::json;

namespace {

// Checks that `fn` throws std::invalid_argument whose message starts with the
// JSON field path `path`.
template <typename Fn>
void check_field_error(Fn&& fn, const std::string& path) {
  bool threw = false;
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    threw = true;
    const std::string message = e.what();
    CHECK_MESSAGE(message.rfind(path, 0) == 0,
                  "expected message to start with '", path, "', got '", message, "'");
  }
  CHECK_MESSAGE(threw, "expected an error on field ", path);
}

}  // namespace

TEST_CASE("model spec JSON round trips") {
  SUBCASE("binary covariate, exponential baseline, administrative end only") {
    const ModelSpec spec = binary_covariate_spec();
    const ModelSpec back = model_spec_from_json(to_json(spec));
    CHECK(back.beta0 == spec.beta0);
    const auto& base = std::get<ExponentialHazard>(back.baseline);
    CHECK(base.rate == 1.0);
    const auto& law = std::get<FiniteDiscreteCovariates>(back.covariates);
    CHECK(law.atoms == std::get<FiniteDiscreteCovariates>(spec.covariates).atoms);
    CHECK(law.probs == std::get<FiniteDiscreteCovariates>(spec.covariates).probs);
    CHECK(back.censoring.rate == 0.0);
    CHECK(back.censoring.study_end == 2.0);

    const json j = to_json(spec);
    CHECK(j["baseline"]["family"] == "exponential");
    CHECK(j["covariates"]["law"] == "finite-discrete");
    CHECK(j["censoring"]["law"] == "none");
  }

  SUBCASE("weibull baseline, box covariates, exponential censoring") {
    ModelSpec spec;
    spec.beta0 = vec({0.25, -0.75});
    spec.baseline = WeibullHazard{2.0, 1.5};
    UniformBoxCovariates box;
    box.lower = vec({-1.0, 0.0});
    box.upper = vec({1.0, 2.0});
    spec.covariates = box;
    spec.censoring = CensoringLaw{0.3, 4.0};
    spec.validate();

    const json j = to_json(spec);
    CHECK(j["baseline"]["family"] == "weibull");
    CHECK(j["covariates"]["law"] == "uniform-box");
    CHECK(j["censoring"]["law"] == "exponential");

    const ModelSpec back = model_spec_from_json(j);
    CHECK(back.beta0 == spec.beta0);
    const auto& base = std::get<WeibullHazard>(back.baseline);
    CHECK(base.scale == 2.0);
    CHECK(base.shape == 1.5);
    const auto& law = std::get<UniformBoxCovariates>(back.covariates);
    CHECK(law.lower == box.lower);
    CHECK(law.upper == box.upper);
    CHECK(back.censoring.rate == 0.3);
    CHECK(back.censoring.study_end == 4.0);
  }

  SUBCASE("doubles survive bit for bit") {
    ModelSpec spec = binary_covariate_spec(0.1 + 0.2);  // deliberately inexact decimal
    const ModelSpec back = model_spec_from_json(to_json(spec));
    CHECK(back.beta0(0) == spec.beta0(0));
  }
}

TEST_CASE("model spec JSON field errors carry the field path") {
  const json good = to_json(binary_covariate_spec());

  SUBCASE("missing beta0") {
    json j = good;
    j.erase("beta0");
    check_field_error([&] { model_spec_from_json(j); }, "spec.beta0: missing");
  }
  SUBCASE("beta0 entry of the wrong type") {
    json j = good;
    j["beta0"] = {0.5, "x"};
    check_field_error([&] { model_spec_from_json(j); }, "beta0[1]: must be a number");
  }
  SUBCASE("unknown baseline family") {
    json j = good;
    j["baseline"]["family"] = "gamma";
    check_field_error([&] { model_spec_from_json(j); }, "baseline.family");
  }
  SUBCASE("bad probability entry") {
    json j = good;
    j["covariates"]["probs"] = {0.5, "half"};
    check_field_error([&] { model_spec_from_json(j); }, "covariates.probs[1]");
  }
  SUBCASE("inconsistent atom row length") {
    json j = good;
    j["covariates"]["atoms"] = {{0.0}, {1.0, 2.0}};
    check_field_error([&] { model_spec_from_json(j); }, "covariates.atoms[1]");
  }
  SUBCASE("unknown covariate law") {
    json j = good;
    j["covariates"]["law"] = "gaussian";
    check_field_error([&] { model_spec_from_json(j); }, "covariates.law");
  }
  SUBCASE("unknown censoring law") {
    json j = good;
    j["censoring"]["law"] = "uniform";
    check_field_error([&] { model_spec_from_json(j); }, "censoring.law");
  }
  SUBCASE("nonpositive study end is rejected with its field name") {
    json j = good;
    j["censoring"]["study_end"] = -1.0;
    check_field_error([&] { model_spec_from_json(j); }, "censoring.study_end");
  }
  SUBCASE("infinite study end is rejected") {
    // JSON has no infinity literal; a null is the closest a config file can
    // get, and it must be rejected as a non-number.
    json j = good;
    j["censoring"]["study_end"] = nullptr;
    check_field_error([&] { model_spec_from_json(j); }, "censoring.study_end");
  }
}

TEST_CASE("fit result JSON round trips with a row-major information matrix") {
  FitResult fit;
  fit.beta_hat = vec({0.5, -1.25});
  fit.converged = true;
  fit.iterations = 7;
  fit.score_norm = 3.5e-12;
  fit.log_likelihood = -123.456;
  fit.information.resize(2, 2);
  fit.information << 1.0, 2.0, 2.0, 5.0;

  const json j = to_json(fit);
  CHECK(j["information"] == json::array({1.0, 2.0, 2.0, 5.0}));

  const FitResult back = fit_result_from_json(j);
  CHECK(back.beta_hat == fit.beta_hat);
  CHECK(back.converged == fit.converged);
  CHECK(back.iterations == 7);
  CHECK(back.score_norm == fit.score_norm);
  CHECK(back.log_likelihood == fit.log_likelihood);
  CHECK(back.information == fit.information);

  SUBCASE("information length must be d*d") {
    json bad = j;
    bad["information"] = {1.0, 2.0, 3.0};
    check_field_error([&] { fit_result_from_json(bad); }, "information");
  }
  SUBCASE("converged must be boolean") {
    json bad = j;
    bad["converged"] = 1;
    check_field_error([&] { fit_result_from_json(bad); }, "converged");
  }
}

TEST_CASE("experiment config JSON round trips") {
  ExperimentConfig cfg;
  cfg.spec = binary_covariate_spec();
  cfg.n_grid = {50, 100, 200};
  cfg.p_list = {1.0, 2.0, 4.0};
  cfg.replications = 250;
  cfg.master_seed = 20260101;
  cfg.epsilon = 0.5;
  cfg.workers = 8;

  const json j = to_json(cfg);
  // Worker count is an execution detail, not part of the experiment's
  // mathematical identity; results are worker-count invariant, so the config
  // serialization must not carry it.
  CHECK(!j.contains("workers"));

  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(back.n_grid == cfg.n_grid);
  CHECK(back.p_list == cfg.p_list);
  CHECK(back.replications == 250);
  CHECK(back.master_seed == 20260101);
  CHECK(back.epsilon == 0.5);
  CHECK(back.workers == 1);  // default, not the serializing side's value
  CHECK(back.spec.beta0 == cfg.spec.beta0);

  SUBCASE("p_list and epsilon are optional") {
    json minimal = j;
    minimal.erase("p_list");
    minimal.erase("epsilon");
    const ExperimentConfig sparse = experiment_config_from_json(minimal);
    CHECK(sparse.p_list.empty());
    CHECK(sparse.epsilon == 0.5);
  }
  SUBCASE("negative master seed is rejected") {
    json bad = j;
    bad["master_seed"] = -1;
    check_field_error([&] { experiment_config_from_json(bad); }, "master_seed");
  }
  SUBCASE("invalid grids fail the config's own validation") {
    json bad = j;
    bad["n_grid"] = {100, 50};
    CHECK_THROWS_AS(experiment_config_from_json(bad), std::invalid_argument);
  }
}

TEST_CASE("JSON files read back what was written") {
  const json j = to_json(binary_covariate_spec());
  const std::string path = temp_path("spec_roundtrip.json");
  write_json_file(j, path);
  const json back = read_json_file(path);
  CHECK(back == j);
  // Written form is human-readable: indented and newline-terminated.
  const std::string text = read_file(path);
  CHECK(text.back() == '\n');
  CHECK(text.find("  \"beta0\"") != std::string::npos);
}

TEST_CASE("missing JSON file error names the path") {
  const std::string path = temp_path("no_such_file.json");
  bool threw = false;
  try {
    read_json_file(path);
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("malformed JSON raises a parse error naming the path") {
  const std::string path = temp_path("broken.json");
  write_file(path, "{ \"beta0\": [0.5,, }");
  bool threw = false;
  try {
    read_json_file(path);
  } catch (const std::invalid_argument& e) {
    threw = true;
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("run manifest records the run identity and outputs") {
  ExperimentConfig cfg;
  cfg.spec = binary_covariate_spec();
  cfg.n_grid = {50};
  cfg.p_list = {1.0};
  cfg.replications = 5;
  cfg.master_seed = 77;
  cfg.workers = 4;

  const std::string dir = temp_path("manifest_dir");
  std::filesystem::create_directories(dir);
  write_run_manifest(cfg, "demo", dir, {"demo_moments.csv", "demo_normality.csv"});

  const json m = read_json_file(dir + "/demo_manifest.json");
  CHECK(m["run"] == "demo");
  CHECK(m["master_seed"] == 77);
  CHECK(m["workers"] == 4);
  CHECK(m["code_version"].is_string());
  CHECK(m["outputs"] == json::array({"demo_moments.csv", "demo_normality.csv"}));
  CHECK(m["config"]["replications"] == 5);
  CHECK(m["config"]["spec"]["beta0"] == json::array({0.5}));
}
