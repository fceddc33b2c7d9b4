#pragma once

// O(U^2) min-entropy correction from the incoherent (M x M) sector of the
// dressed generator: the reduced erfc kernel, the unregularized form with
// its second-order-pole divergence scan, the B* = B^alpha regularization,
// the leading-scaling closed form, and a brute-force mode-sum oracle on
// tiny grids.
//
// Sign convention: delta S >= 0. The correction is -4 int B dB <eta_M^2>
// with an anti-Hermitian generator, so it adds entanglement on top of the
// Z-suppressed quadratic part (see README for the sign discussion).

#include <utility>
#include <vector>

#include "flowent/flow_free.hpp"
#include "flowent/lattice.hpp"
#include "flowent/quadrature.hpp"

namespace flowent {

struct CorrectionInput {
  double g = 0.0;       // weak-link amplitude
  double u = 0.0;       // interaction strength
  double mu = 0.0;      // chemical potential
  double lambda = 1.0;  // UV cutoff
  double l = 2.0;       // subsystem length
  double rho_mu = 0.5;  // density of states at mu

  void validate() const;  // throws std::invalid_argument
};

// Fills rho_mu from the lattice density of states.
CorrectionInput make_correction_input(double g, double u, double mu,
                                      double lambda, double l);

struct RegularizationSchedule {
  double alpha = 0.25;  // B* = B^alpha, alpha in (0, 1)
  double eps0 = 2.0;    // bandwidth bound of the scaled-energy integral

  void validate() const;
};

// Constant multiplying every correction integral:
// 3 g^2 U^2 rho_mu / (pi^2 sqrt(2 pi)).
double correction_prefactor(const CorrectionInput& inp);

// E^2 erfc(E) / (E + eps_l)^2 in the scaled variables; E >= 0. Hitting the
// second-order pole E + eps_l = 0 exactly is a domain error, not a number.
double correction_integrand(double e, double eps_l);

// Unregularized correction with the B-integral done analytically
// (int B^{-3/2} dB = 2 lambda (1 - 1/l)), scanned over exclusion windows of
// half-width delta around the pole line. The scaled-energy integral runs
// over the full line, where the window integral is exactly 2/delta; both
// factors are evaluated by quadrature here. Returns (delta, value) pairs
// exhibiting the ~1/delta divergence (log-log slope -1).
std::vector<std::pair<double, double>> delta_s_unregularized(
    const CorrectionInput& inp, const std::vector<double>& windows,
    const QuadratureConfig& cfg = {});

// int_0^inf dE E^2 erfc(E) (E - eps)^2 = 2/(5 sqrt(pi)) - (3/8) eps
// + eps^2/(3 sqrt(pi)).
double erfc_moment(double eps);

// Regularized triple integral
//   I = int_{(1/lambda)^2}^{(l/lambda)^2} dB B^{-3/2}
//       int_0^{sqrt(2B) eps0} d eps
//       int_0^inf dE E^2 erfc(E) (1 - e^{-(B^alpha/B)(E-eps)^2})^2/(E-eps)^2,
// finite for all alpha in (0,1): the regulator vanishes quadratically at
// the pole. `exclusion` > 0 removes (eps - delta, eps + delta) from the
// E-integral; the result must be exclusion-independent for small windows.
double delta_s_regularized(const CorrectionInput& inp,
                           const RegularizationSchedule& sched,
                           const QuadratureConfig& cfg = {},
                           double exclusion = 0.0);

// Leading l-scaling of the regularized B-integral:
// lambda^{2-4 alpha}/(2 alpha - 1) (l^{-(2-4 alpha)} - 1); the alpha = 1/2
// limit is 2 ln l. At alpha = 1/4 this is 2 lambda (1 - 1/l): 1/l scaling.
double leading_scaling(double alpha, double lambda, double l);

struct CorrectionSweep {
  std::vector<std::pair<double, double>> points;  // (l, delta_S)
  FitResult fit;  // delta_S(l) - delta_S(l_max) against 1/l
};

// Prefactor times the regularized integral over an l-sweep, plus the
// inverse-l fit of the differences from the largest l.
CorrectionSweep delta_s_full(const CorrectionInput& inp,
                             const RegularizationSchedule& sched,
                             const std::vector<double>& l_values,
                             const QuadratureConfig& cfg = {});

// Brute-force mode-sum of the M x M correction on a tiny grid: momentum
// bookkeeping l + p = p' + q' applied on mode indices, trilinear
// self-contractions p = p' and p = q' excluded, occupation factor
// n n (1-n)(1-n) + (1-n)(1-n) n n, per-channel B-integral in closed form.
// Oracle for the analytic reduction; O(N^4) work, meant for N <= 16.
double delta_s_mode_sum(const LatticeModel& model, double lambda, double l);

}  // namespace flowent
