#pragma once

// Disentangling flow for the quadratic sector of the weak link: generator
// coefficients eta_lm(B), the <eta^2(B)> expectation in the filled Fermi
// sea, the min-entropy flow integral, scaling fits, and the 2D transverse
// channel decomposition.

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "flowent/lattice.hpp"
#include "flowent/quadrature.hpp"

namespace flowent {

struct EtaCoefficients {
  // amplitudes(l, m) = c * sin k_l * sin k_m * e^{-B (e_l - e_m)^2} * (e_l - e_m)
  // with c = 2g / sqrt((N_a + 1)(N_b + 1)); rows run over A-modes, columns
  // over B-modes. Vanishes on degenerate pairs e_l = e_m.
  Eigen::MatrixXd amplitudes;
  double flow_time = 0.0;
  double residue_scale = 1.0;  // quasiparticle h factor; 1 for free fermions
};

struct ScanMeta {
  double g = 0.0;
  double mu = 0.0;
  double lambda = 1.0;
  int modes = 0;            // modes per subsystem
  int spin_degeneracy = 1;  // 2 when the scan counted both spin species
};

struct EntropyScan {
  std::vector<std::pair<double, double>> points;  // (l, S in nats), l increasing
  ScanMeta meta;
};

enum class FitModel { log_l, inverse_l, power_law };

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  FitModel model = FitModel::log_l;
};

// Generator amplitudes at flow time B >= 0. Grids must carry energies
// consistent with the dispersion (as built by mode_grid); residue_scale is
// taken from the optional last argument for dressed quasiparticles.
EtaCoefficients eta_coefficients(const LatticeModel& model,
                                 const ModeGrid& grid_a, const ModeGrid& grid_b,
                                 double b_time, double residue_scale = 1.0);

// -(spin factor) * sum_{l,m} eta_lm^2 [n_l(1-n_m) + (1-n_l)n_m]; always <= 0.
double eta_squared_expectation(const EtaCoefficients& eta,
                               const std::vector<int>& occ_a,
                               const std::vector<int>& occ_b, bool spinful);

// S = -4 int_{(1/lambda)^2}^{(l/lambda)^2} B <eta^2(B)> dB, adaptive
// quadrature in t = ln B. Mode counts come from the model's subsystem
// sizes; l enters through the upper flow limit only. Requires lambda > 0,
// l > 1. Non-convergence rethrows NonConvergence with the partial value.
double min_entropy_flow(const LatticeModel& model, double lambda, double l,
                        const QuadratureConfig& cfg = {});

// Same pair sum with the B-integral done analytically per pair
// (int B e^{-xB} dB in closed form). Fast path and quadrature cross-check.
double min_entropy_flow_pair_sum(const LatticeModel& model, double lambda,
                                 double l);

// Least-squares fit of S against ln l (log_l), 1/l (inverse_l), or, for
// power_law, of ln S against ln l (slope = exponent; requires S > 0).
// Needs >= 4 points; throws on a degenerate design matrix.
FitResult fit_scaling(const EntropyScan& scan, FitModel model);

// Transverse channel sum: 1D flow entropies at mu_eff(k_y) = mu + 2 cos k_y
// over k_y = pi j/(n_y + 1), j = 1..n_y; channels with |mu_eff| >= 2
// contribute zero. n_y = 1 reduces to the 1D result at mu.
double min_entropy_2d(const LatticeModel& model, int n_y, double lambda,
                      double l, const QuadratureConfig& cfg = {});

// Spin-degenerate 1D coefficient of ln l: g^2 (4/pi^2)(1 - mu^2/4).
// One spin species contributes half of this.
double log_slope_closed_form(double g, double mu);

// Printed 2D coefficient of ln l:
// g^2 n_y/(2 pi^3) [(2 - mu^2) asin(mu/2 - 1) + sqrt(mu - mu^2/4)(6 mu - 4)],
// defined for mu in [0, 4]. Kept verbatim as the comparison target for the
// channel-summed scan; see README for the observed disagreement.
double channel_slope_closed_form(double g, double mu, int n_y);

}  // namespace flowent
