#include <doctest.h>

#include <cmath>
#include <vector>

#include "flowent/flow_free.hpp"

using namespace flowent;

namespace {

LatticeModel make_model(int n, double g, double mu, bool spinful = false) {
  LatticeModel m;
  m.n_sites_a = n;
  m.n_sites_b = n;
  m.g = g;
  m.mu = mu;
  m.spinful = spinful;
  return m;
}

}  // namespace

TEST_CASE("generator amplitudes vanish on degenerate pairs") {
  const auto m = make_model(5, 0.8, 0.0);
  const auto grid = mode_grid(5, 0.0);
  const auto eta = eta_coefficients(m, grid, grid, 0.7);
  for (int i = 0; i < 5; ++i) CHECK(eta.amplitudes(i, i) == 0.0);
  // antisymmetric under exchanging the mode energies
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(eta.amplitudes(i, j) ==
            doctest::Approx(-eta.amplitudes(j, i)).scale(1.0).epsilon(1e-15));
}

TEST_CASE("generator amplitudes scale with g and the residue factor") {
  const auto grid_a = mode_grid(4, 0.2);
  const auto grid_b = mode_grid(6, 0.2);
  const auto base =
      eta_coefficients(make_model(4, 0.3, 0.2), grid_a, grid_b, 0.5);
  const auto doubled =
      eta_coefficients(make_model(4, 0.6, 0.2), grid_a, grid_b, 0.5);
  const auto dressed =
      eta_coefficients(make_model(4, 0.3, 0.2), grid_a, grid_b, 0.5, 0.25);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 6; ++j) {
      CHECK(doubled.amplitudes(i, j) ==
            doctest::Approx(2.0 * base.amplitudes(i, j)).scale(1.0).epsilon(
                1e-14));
      CHECK(dressed.amplitudes(i, j) ==
            doctest::Approx(0.25 * base.amplitudes(i, j)).scale(1.0).epsilon(
                1e-14));
    }
  }
}

TEST_CASE("tampered grid energies are rejected") {
  const auto m = make_model(4, 0.5, 0.0);
  auto grid = mode_grid(4, 0.0);
  grid.energies[1] += 1e-9;
  CHECK_THROWS_AS(eta_coefficients(m, grid, mode_grid(4, 0.0), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      eta_coefficients(m, mode_grid(4, 0.0), mode_grid(4, 0.0), -1.0),
      std::invalid_argument);
}

TEST_CASE("eta-squared expectation is nonpositive and spin doubles it") {
  const auto m = make_model(6, 0.5, 0.3);
  const auto ga = mode_grid(6, 0.3);
  const auto eta = eta_coefficients(m, ga, ga, 0.4);
  const double one = eta_squared_expectation(eta, ga.occupations,
                                             ga.occupations, false);
  const double two = eta_squared_expectation(eta, ga.occupations,
                                             ga.occupations, true);
  CHECK(one <= 0.0);
  CHECK(one < -1e-8);  // half filling leaves open decay channels
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-15));
}

TEST_CASE("flow expectation dies off at large flow time") {
  const auto m = make_model(64, 0.5, 0.0);
  const auto ga = mode_grid(64, 0.0);
  const auto early = eta_coefficients(m, ga, ga, 0.25);
  const auto late = eta_coefficients(m, ga, ga, 1000.0);
  const double e0 = eta_squared_expectation(early, ga.occupations,
                                            ga.occupations, false);
  const double e1 = eta_squared_expectation(late, ga.occupations,
                                            ga.occupations, false);
  CHECK(std::abs(e1) < 1e-6 * std::abs(e0));
}

TEST_CASE("decoupled link flows to zero entropy") {
  const auto m = make_model(16, 0.0, 0.0);
  CHECK(min_entropy_flow(m, 1.0, 8.0) == 0.0);
  CHECK(min_entropy_flow_pair_sum(m, 1.0, 8.0) == 0.0);
}

TEST_CASE("flow argument validation") {
  const auto m = make_model(8, 0.5, 0.0);
  CHECK_THROWS_AS(min_entropy_flow(m, 0.0, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(min_entropy_flow(m, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(min_entropy_flow_pair_sum(m, -1.0, 8.0),
                  std::invalid_argument);
}

TEST_CASE("quadrature agrees with the analytic pair sum") {
  for (double mu : {0.0, 0.3}) {
    const auto m = make_model(32, 0.7, mu);
    const double quad = min_entropy_flow(m, 1.0, 8.0);
    const double analytic = min_entropy_flow_pair_sum(m, 1.0, 8.0);
    CHECK(quad == doctest::Approx(analytic).epsilon(1e-7));
  }
}

TEST_CASE("entropy is quartic-free: S scales as g^2") {
  const auto weak = make_model(24, 0.2, 0.1);
  const auto strong = make_model(24, 0.4, 0.1);
  const double s1 = min_entropy_flow_pair_sum(weak, 1.0, 6.0);
  const double s2 = min_entropy_flow_pair_sum(strong, 1.0, 6.0);
  CHECK(s2 == doctest::Approx(4.0 * s1).epsilon(1e-12));
}

TEST_CASE("particle-hole symmetry of the flow entropy") {
  const double a = min_entropy_flow_pair_sum(make_model(24, 0.5, 0.5), 1.0,
                                             8.0);
  const double b = min_entropy_flow_pair_sum(make_model(24, 0.5, -0.5), 1.0,
                                             8.0);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("entropy grows with the subsystem length") {
  const auto m = make_model(64, 0.5, 0.0);
  double prev = 0.0;
  for (double l : {2.0, 4.0, 8.0, 16.0}) {
    const double s = min_entropy_flow_pair_sum(m, 1.0, l);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("spin degeneracy doubles the scan entropy") {
  const double one =
      min_entropy_flow_pair_sum(make_model(24, 0.5, 0.0, false), 1.0, 8.0);
  const double two =
      min_entropy_flow_pair_sum(make_model(24, 0.5, 0.0, true), 1.0, 8.0);
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-15));
}

TEST_CASE("non-convergent flow reports the scaled partial value") {
  const auto m = make_model(16, 0.5, 0.0);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-15;
  cfg.abs_tol = 1e-300;
  cfg.max_subdivisions = 1;
  bool thrown = false;
  try {
    min_entropy_flow(m, 1.0, 8.0, cfg);
  } catch (const NonConvergence& e) {
    thrown = true;
    CHECK(e.partial_value() > 0.0);
  }
  CHECK(thrown);
}

TEST_CASE("scaling fits recover exact laws") {
  EntropyScan scan;
  for (double l : {8.0, 16.0, 32.0, 64.0, 128.0})
    scan.points.emplace_back(l, 0.4 * std::log(l) + 0.1);
  auto fit = fit_scaling(scan, FitModel::log_l);
  CHECK(fit.slope == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(fit.residual_rms < 1e-12);

  scan.points.clear();
  for (double l : {8.0, 16.0, 32.0, 64.0})
    scan.points.emplace_back(l, 2.0 / l + 5.0);
  fit = fit_scaling(scan, FitModel::inverse_l);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(5.0).epsilon(1e-12));

  scan.points.clear();
  for (double l : {8.0, 16.0, 32.0, 64.0})
    scan.points.emplace_back(l, 3.0 * std::pow(l, 0.7));
  fit = fit_scaling(scan, FitModel::power_law);
  CHECK(fit.slope == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  // constant data has zero slope in every linear model
  scan.points.clear();
  for (double l : {8.0, 16.0, 32.0, 64.0}) scan.points.emplace_back(l, 1.5);
  fit = fit_scaling(scan, FitModel::log_l);
  CHECK(fit.slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("scaling fit input validation") {
  EntropyScan scan;
  scan.points = {{8.0, 0.1}, {16.0, 0.2}, {32.0, 0.3}};
  CHECK_THROWS_AS(fit_scaling(scan, FitModel::log_l), std::invalid_argument);

  scan.points = {{8.0, 0.1}, {16.0, -0.2}, {32.0, 0.3}, {64.0, 0.4}};
  CHECK_THROWS_AS(fit_scaling(scan, FitModel::power_law), std::runtime_error);

  scan.points = {{8.0, 0.1}, {8.0, 0.1}, {8.0, 0.1}, {8.0, 0.1}};
  CHECK_THROWS_AS(fit_scaling(scan, FitModel::log_l), std::runtime_error);
}

TEST_CASE("single transverse channel reduces to the 1D flow") {
  const auto m = make_model(32, 0.5, 0.3);
  const double strip = min_entropy_2d(m, 1, 1.0, 6.0);
  const double chain = min_entropy_flow(m, 1.0, 6.0);
  CHECK(strip == doctest::Approx(chain).epsilon(1e-12));
}

TEST_CASE("transverse channels outside the band contribute nothing") {
  // mu = 1.5, n_y = 3: the k_y = pi/4 channel sits at mu_eff = 1.5 + sqrt(2)
  // above the band edge and must drop out of the sum
  const double mu = 1.5;
  const double pi = std::acos(-1.0);
  const auto m = make_model(16, 0.5, mu);
  const double strip = min_entropy_2d(m, 3, 1.0, 4.0);

  double by_hand = 0.0;
  for (int j = 1; j <= 3; ++j) {
    const double mu_eff = mu + 2.0 * std::cos(pi * j / 4.0);
    if (std::abs(mu_eff) >= 2.0) continue;
    by_hand += min_entropy_flow(make_model(16, 0.5, mu_eff), 1.0, 4.0);
  }
  CHECK(strip == doctest::Approx(by_hand).epsilon(1e-12));
  CHECK(strip <
        3.0 * min_entropy_flow(make_model(16, 0.5, 0.0), 1.0, 4.0));
}

TEST_CASE("closed-form slope coefficients") {
  const double pi = std::acos(-1.0);
  CHECK(log_slope_closed_form(1.0, 0.0) ==
        doctest::Approx(4.0 / (pi * pi)).epsilon(1e-14));
  CHECK(log_slope_closed_form(0.5, 1.0) ==
        doctest::Approx(0.25 * (4.0 / (pi * pi)) * 0.75).epsilon(1e-14));
  // at the band center of the 2D dispersion the arcsin term drops out
  CHECK(channel_slope_closed_form(1.0, 2.0, 10) ==
        doctest::Approx(4.0 * 10.0 / (pi * pi * pi)).epsilon(1e-12));
  CHECK_THROWS_AS(channel_slope_closed_form(1.0, -0.5, 10), std::domain_error);
  CHECK_THROWS_AS(channel_slope_closed_form(1.0, 4.5, 10), std::domain_error);
}

TEST_CASE("half-filled chain entropy growth matches the logarithmic law") {
  const auto m = make_model(2048, 1.0, 0.0);
  EntropyScan scan;
  for (double l : {16.0, 32.0, 64.0, 128.0, 256.0})
    scan.points.emplace_back(l, min_entropy_flow_pair_sum(m, 1.0, l));

  // frozen reference for the smallest length
  CHECK(scan.points.front().second == doctest::Approx(0.5532).epsilon(2e-3));

  const auto fit = fit_scaling(scan, FitModel::log_l);
  const double pi = std::acos(-1.0);
  CHECK(fit.slope == doctest::Approx(2.0 / (pi * pi)).epsilon(0.02));
  CHECK(fit.residual_rms < 0.01 * fit.slope);
}
