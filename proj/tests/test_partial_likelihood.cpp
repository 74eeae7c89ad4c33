#include <cmath>
#include <random>

#include "doctest.h"
#include "test_helpers.hpp"

#include "cox/partial_likelihood.hpp"

using namespace cox;
using cox_test::make_dataset;
using cox_test::vec;

namespace {

// Random dataset with a mix of events and censoring.
Dataset random_dataset(int n, int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector t(n);
  IntVector s(n);
  Matrix z(n, d);
  for (int i = 0; i < n; ++i) {
    t(i) = -std::log(unif(rng));
    s(i) = unif(rng) < 0.7 ? 1 : 0;
    for (int k = 0; k < d; ++k) z(i, k) = 2.0 * unif(rng) - 1.0;
  }
  s(0) = 1;  // at least one event
  return Dataset(std::move(t), std::move(s), std::move(z));
}

Vector fd_gradient(const Dataset& ds, const Vector& beta, double h) {
  Vector g(beta.size());
  for (Index k = 0; k < beta.size(); ++k) {
    Vector up = beta, dn = beta;
    up(k) += h;
    dn(k) -= h;
    g(k) = (log_partial_likelihood(up, ds) - log_partial_likelihood(dn, ds)) / (2.0 * h);
  }
  return g;
}

Matrix fd_neg_hessian(const Dataset& ds, const Vector& beta, double h) {
  const Index d = beta.size();
  Matrix m(d, d);
  for (Index k = 0; k < d; ++k) {
    Vector up = beta, dn = beta;
    up(k) += h;
    dn(k) -= h;
    m.col(k) = -(score(up, ds) - score(dn, ds)) / (2.0 * h);
  }
  return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("risk_mass identity and boundary cases") {
  Dataset ds = make_dataset({1.0, 2.0, 3.0}, {1, 1, 0}, {0.4, -0.2, 1.0});
  Vector zero = Vector::Zero(1);
  CHECK(risk_mass(0.5, zero, ds) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(risk_mass(1.0, zero, ds) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(risk_mass(3.5, zero, ds) == 0.0);
}

TEST_CASE("risk_mass direct evaluation example") {
  Dataset ds = make_dataset({1.0, 2.0}, {1, 1}, {0.0, std::log(2.0)});
  CHECK(risk_mass(1.5, vec({1.0}), ds) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("risk_mass_grad examples") {
  Dataset zero_z = make_dataset({1.0, 2.0}, {1, 1}, {0.0, 0.0});
  for (double t : {0.0, 1.5, 2.0})
    CHECK(risk_mass_grad(t, vec({0.7}), zero_z).cwiseAbs().maxCoeff() == 0.0);

  Dataset ds = make_dataset({1.0, 3.0}, {1, 1}, {2.0, -1.0});
  Vector g = risk_mass_grad(2.0, Vector::Zero(1), ds);
  REQUIRE(g.size() == 1);
  CHECK(g(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(risk_mass_grad(3.5, Vector::Zero(1), ds).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("risk_mass_hess examples and symmetry") {
  Dataset single = make_dataset({1.0}, {1}, {3.0});
  Matrix h = risk_mass_hess(0.5, Vector::Zero(1), single);
  CHECK(h(0, 0) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(risk_mass_hess(1.5, Vector::Zero(1), single).cwiseAbs().maxCoeff() == 0.0);

  Dataset ds = random_dataset(30, 3, 12345);
  Vector beta = vec({0.3, -0.8, 0.1});
  Matrix hh = risk_mass_hess(0.7, beta, ds);
  CHECK((hh - hh.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  for (Index k = 0; k < 3; ++k) CHECK(hh(k, k) >= 0.0);
}

TEST_CASE("log partial likelihood closed forms") {
  SUBCASE("covariate-free, all events, distinct times") {
    Dataset ds = make_dataset({1.0, 2.0, 3.0, 4.0, 5.0}, {1, 1, 1, 1, 1},
                              {0.0, 0.0, 0.0, 0.0, 0.0});
    const double expected = -std::log(120.0);  // -log(5!)
    CHECK(log_partial_likelihood(Vector::Zero(1), ds) ==
          doctest::Approx(expected).epsilon(1e-14));
    // Independent of beta when the covariate never varies.
    CHECK(log_partial_likelihood(vec({2.5}), ds) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("two observations, closed form -log(1+e^b)") {
    Dataset ds = make_dataset({1.0, 2.0}, {1, 1}, {0.0, 1.0});
    for (double b : {-2.0, 0.0, 1.3}) {
      CHECK(log_partial_likelihood(vec({b}), ds) ==
            doctest::Approx(-std::log(1.0 + std::exp(b))).epsilon(1e-14));
    }
  }
  SUBCASE("single observation contributes zero") {
    Dataset ds = make_dataset({1.0}, {1}, {5.0});
    for (double b : {-1.0, 0.0, 2.0})
      CHECK(log_partial_likelihood(vec({b}), ds) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("tied events share the full risk set") {
    // times (1,1,2), all events, Z = (0,1,0): value b - 2 log(2 + e^b).
    Dataset ds = make_dataset({1.0, 1.0, 2.0}, {1, 1, 1}, {0.0, 1.0, 0.0});
    const double b = 0.3;
    CHECK(log_partial_likelihood(vec({b}), ds) ==
          doctest::Approx(b - 2.0 * std::log(2.0 + std::exp(b))).epsilon(1e-14));
  }
}

TEST_CASE("no events is rejected") {
  Dataset ds = make_dataset({1.0, 2.0}, {0, 0}, {0.0, 1.0});
  CHECK_THROWS_AS(log_partial_likelihood(Vector::Zero(1), ds), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_partial_likelihood(Vector::Zero(1), ds), std::invalid_argument);
}

TEST_CASE("score closed forms") {
  SUBCASE("common covariate vector gives zero score") {
    Dataset ds = make_dataset({1.0, 2.0, 3.0}, {1, 0, 1}, {4.0, 4.0, 4.0});
    CHECK(score(vec({0.9}), ds).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("two observations") {
    Dataset ds = make_dataset({1.0, 2.0}, {1, 1}, {0.0, 1.0});
    for (double b : {-1.0, 0.0, 0.7}) {
      const double eb = std::exp(b);
      CHECK(score(vec({b}), ds)(0) == doctest::Approx(-eb / (1.0 + eb)).epsilon(1e-14));
    }
  }
}

TEST_CASE("information closed forms") {
  SUBCASE("two observations at beta zero") {
    Dataset ds = make_dataset({1.0, 2.0}, {1, 1}, {0.0, 1.0});
    CHECK(information(Vector::Zero(1), ds)(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("degenerate covariates give the zero matrix") {
    Dataset ds = make_dataset({1.0, 2.0, 3.0}, {1, 1, 0}, {4.0, 4.0, 4.0});
    CHECK(information(vec({-0.4}), ds).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("score and information match finite differences") {
  for (unsigned seed : {1u, 2u, 3u}) {
    Dataset ds = random_dataset(60, 3, seed);
    Vector beta = vec({0.4, -0.6, 0.25});
    const Vector g = score(beta, ds);
    const Vector g_fd = fd_gradient(ds, beta, 1e-6);
    CHECK((g - g_fd).cwiseAbs().maxCoeff() <=
          1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    const Matrix h = information(beta, ds);
    const Matrix h_fd = fd_neg_hessian(ds, beta, 1e-5);
    CHECK((h - h_fd).cwiseAbs().maxCoeff() <=
          1e-5 * std::max(1.0, h.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("evaluate_partial_likelihood agrees with the single-quantity routes") {
  Dataset ds = random_dataset(40, 2, 77);
  Vector beta = vec({0.2, -0.9});
  LikelihoodEval eval = evaluate_partial_likelihood(beta, ds);
  CHECK(eval.value == doctest::Approx(log_partial_likelihood(beta, ds)).epsilon(1e-14));
  CHECK((eval.score - score(beta, ds)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((eval.information - information(beta, ds)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((eval.information - eval.information.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("suffix sweep agrees with direct sums under extreme coefficients") {
  Dataset ds = random_dataset(50, 2, 99);
  // Linear predictors reach roughly +/-300: far beyond what unshifted
  // accumulation of exp() products would keep accurate.
  for (double scale : {-300.0, -5.0, 5.0, 300.0}) {
    Vector beta = vec({scale, 0.5 * scale});
    RiskSetCurves curves = risk_set_curves(ds, beta, true);
    REQUIRE(curves.times.size() > 0);
    for (Index k = 0; k < curves.times.size(); ++k) {
      const double t = curves.times(k);
      const double direct = risk_mass(t, beta, ds);
      CHECK(curves.mass(k) == doctest::Approx(direct).epsilon(1e-12));
      const Vector dg = risk_mass_grad(t, beta, ds);
      const Matrix dh = risk_mass_hess(t, beta, ds);
      // Ratios to the mass are the stable quantities the sweep stores.
      CHECK((curves.grad_over_mass.row(k).transpose() - dg / direct)
                .cwiseAbs()
                .maxCoeff() < 1e-12 * std::max(1.0, (dg / direct).cwiseAbs().maxCoeff()));
      CHECK((curves.hess_over_mass[static_cast<std::size_t>(k)] - dh / direct)
                .cwiseAbs()
                .maxCoeff() < 1e-11 * std::max(1.0, (dh / direct).cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("risk_index and query helpers") {
  Dataset ds = make_dataset({1.0, 2.0, 2.0, 4.0}, {1, 1, 0, 1}, {0.1, -0.2, 0.3, 0.0});
  Vector beta = vec({0.5});
  RiskSetCurves curves = risk_set_curves(ds, beta, false);
  REQUIRE(curves.times.size() == 3);  // distinct times 1, 2, 4
  CHECK(curves.risk_index(0.0) == 0);
  CHECK(curves.risk_index(1.0) == 0);
  CHECK(curves.risk_index(1.5) == 1);
  CHECK(curves.risk_index(4.0) == 2);
  CHECK(curves.risk_index(4.5) == 3);
  CHECK(curves.mass_at(1.5) == doctest::Approx(risk_mass(1.5, beta, ds)).epsilon(1e-14));
  CHECK(curves.mass_at(9.0) == 0.0);
  CHECK(curves.grad_at(9.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("score_up_to truncates the event sum") {
  Dataset ds = random_dataset(30, 2, 2024);
  Vector beta = vec({0.3, 0.1});
  const double tmax = ds.times().maxCoeff();
  CHECK((score_up_to(tmax + 1.0, beta, ds) - score(beta, ds)).cwiseAbs().maxCoeff() <
        1e-12);
  const double first_event = ds.event_times()(0);
  CHECK(score_up_to(first_event - 1e-9, beta, ds).cwiseAbs().maxCoeff() == 0.0);

  // Mid-sample truncation: recompute by a direct loop over events.
  const double tcut = ds.times()(ds.size() / 2);
  RiskSetCurves curves = risk_set_curves(ds, beta, false);
  Vector direct = Vector::Zero(2);
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.status_of(i) != 1 || ds.time(i) > tcut) continue;
    direct += ds.covariate_row(i).transpose() -
              curves.grad_over_mass.row(curves.risk_index(ds.time(i))).transpose();
  }
  CHECK((score_up_to(tcut, beta, ds) - direct).cwiseAbs().maxCoeff() < 1e-12);
}
