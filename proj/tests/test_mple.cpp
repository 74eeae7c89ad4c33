#include <cmath>

#include "doctest.h"
#include "test_helpers.hpp"

#include "cox/dgp.hpp"
#include "cox/mple.hpp"

using namespace cox;
using cox_test::binary_covariate_spec;
using cox_test::make_dataset;
using cox_test::vec;

TEST_CASE("monotone likelihood is detected on the separable two-row sample") {
  // S'(b) = -e^b/(1+e^b) < 0 everywhere: the likelihood climbs forever as
  // b -> -inf, so no finite maximizer exists.
  Dataset ds = make_dataset({1.0, 2.0}, {1, 1}, {0.0, 1.0});
  try {
    fit(ds);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.kind == FitErrorKind::monotone_likelihood);
    CHECK(std::string(e.what()).find("monotone likelihood") != std::string::npos);
  }
}

TEST_CASE("degenerate covariates raise singular information") {
  Dataset ds = make_dataset({1.0, 2.0, 3.0}, {1, 1, 0}, {4.0, 4.0, 4.0});
  try {
    fit(ds);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.kind == FitErrorKind::singular_information);
  }
}

TEST_CASE("a sample without events cannot be fit") {
  Dataset ds = make_dataset({1.0, 2.0}, {0, 0}, {0.0, 1.0});
  try {
    fit(ds);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(e.kind == FitErrorKind::no_events);
  }
}

TEST_CASE("fit matches a brute-force grid argmax") {
  const ModelSpec spec = binary_covariate_spec();
  Dataset ds = simulate(spec, 20, SeedSpec{424242, 7});
  FitResult fr = fit(ds);
  REQUIRE(fr.converged);

  double best_b = 0.0, best_v = -1e300;
  for (long k = -50000; k <= 50000; ++k) {
    const double b = static_cast<double>(k) * 1e-4;
    const double v = log_partial_likelihood(vec({b}), ds);
    if (v > best_v) {
      best_v = v;
      best_b = b;
    }
  }
  CHECK(std::abs(fr.beta_hat(0) - best_b) <= 2e-4);
  CHECK(fr.log_likelihood >= best_v - 1e-9);
}

TEST_CASE("converged fits satisfy the first-order conditions") {
  const ModelSpec spec = binary_covariate_spec();
  Dataset ds = simulate(spec, 200, SeedSpec{5150, 1});
  FitResult fr = fit(ds);
  REQUIRE(fr.converged);
  CHECK(fr.score_norm <= 1e-8);
  CHECK(score(fr.beta_hat, ds).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(fr.iterations <= 50);
  CHECK(fr.information(0, 0) > 0.0);
  CHECK(fr.log_likelihood ==
        doctest::Approx(log_partial_likelihood(fr.beta_hat, ds)).epsilon(1e-12));
}

TEST_CASE("the starting point does not change the maximizer") {
  const ModelSpec spec = binary_covariate_spec();
  Dataset ds = simulate(spec, 150, SeedSpec{5150, 2});
  FitResult from_zero = fit(ds);
  SolverConfig cfg;
  cfg.initial = vec({2.0});
  FitResult from_two = fit(ds, cfg);
  REQUIRE(from_zero.converged);
  REQUIRE(from_two.converged);
  CHECK(std::abs(from_zero.beta_hat(0) - from_two.beta_hat(0)) < 1e-6);
}

TEST_CASE("a one-iteration budget reports non-convergence without throwing") {
  const ModelSpec spec = binary_covariate_spec();
  Dataset ds = simulate(spec, 200, SeedSpec{5150, 3});
  SolverConfig cfg;
  cfg.max_iterations = 1;
  cfg.initial = vec({3.0});  // far from the optimum so one step is not enough
  FitResult fr = fit(ds, cfg);
  CHECK_FALSE(fr.converged);
  CHECK(fr.score_norm > cfg.tolerance);
}

TEST_CASE("two-dimensional fit recovers the signal") {
  ModelSpec spec;
  spec.beta0 = vec({0.5, -0.3});
  spec.baseline = ExponentialHazard{1.0};
  Matrix atoms(4, 2);
  atoms << 0, 0, 1, 0, 0, 1, 1, 1;
  Vector probs = Vector::Constant(4, 0.25);
  spec.covariates = FiniteDiscreteCovariates{atoms, probs};
  spec.censoring = CensoringLaw{0.0, 2.0};
  Dataset ds = simulate(spec, 800, SeedSpec{31337, 4});
  FitResult fr = fit(ds);
  REQUIRE(fr.converged);
  CHECK((fr.beta_hat - spec.beta0).cwiseAbs().maxCoeff() < 0.4);
  // Information is symmetric positive definite at the optimum.
  Eigen::SelfAdjointEigenSolver<Matrix> es(fr.information);
  CHECK(es.eigenvalues()(0) > 0.0);
}

TEST_CASE("information_within_limit measures relative closeness") {
  Matrix sigma = Matrix::Constant(1, 1, 0.25);
  FitResult fr;
  fr.beta_hat = vec({0.0});
  fr.converged = true;

  SUBCASE("exact match passes any threshold") {
    fr.information = Matrix::Constant(1, 1, 100.0 * 0.25);
    CHECK(information_within_limit(fr, 100, sigma, 1e-12));
  }
  SUBCASE("zero information sits at relative distance one") {
    fr.information = Matrix::Zero(1, 1);
    CHECK_FALSE(information_within_limit(fr, 100, sigma, 0.999));
    CHECK(information_within_limit(fr, 100, sigma, 1.001));
  }
  SUBCASE("non-converged fits are rejected") {
    fr.converged = false;
    fr.information = Matrix::Constant(1, 1, 25.0);
    CHECK_THROWS_AS(information_within_limit(fr, 100, sigma, 0.5),
                    std::invalid_argument);
  }
  SUBCASE("singular reference matrix is rejected") {
    fr.information = Matrix::Constant(1, 1, 25.0);
    Matrix bad = Matrix::Zero(1, 1);
    CHECK_THROWS_AS(information_within_limit(fr, 100, bad, 0.5), std::domain_error);
  }
}
