#pragma once

// Diagonalizing flow for subsystem A's Hubbard chain, truncated at O(U):
// the coupled ODE system for the dressing functions h_l(B) and
// M^l_{p'q'p}(B), their closed-form solutions, and the quasiparticle
// residue Z = h_{k_F}^2. One spin copy is computed; the equations are
// spin-symmetric.
//
// Truncated system (signs fixed by the closed forms; h decreases from 1):
//   dM^l_{p'q'p}/dB = U * Delta * e^{-B Delta^2}
//   dh_l/dB = -U * sum_{p'q'p} M^l_{p'q'p} * Delta * e^{-B Delta^2} * Q_{p'pq'}
// with Delta = e_{p'} - e_p + e_{q'} - e_l, the sum running over channels
// obeying the momentum bookkeeping l + p = p' + q' (mode indices), and
// Q_{p'pq'} = n_{p'} n_{q'} (1 - n_p) + (1 - n_{p'})(1 - n_{q'}) n_p,
// the phase-space factor gating decay into particle-hole pairs (see README
// for the convention).

#include <cstddef>
#include <vector>

#include "flowent/lattice.hpp"
#include "flowent/quadrature.hpp"

namespace flowent {

struct FlowState {
  double flow_time = 0.0;
  std::vector<double> h;  // h_l(B), one per A-grid mode
  std::vector<double> m;  // M^l_{p'q'p}(B), rank-4, layout via m_index()

  // First excursion of h_l outside (0, 1], one record per mode. A
  // diagnostic, not an error: band-edge modes legitimately overshoot at
  // large B U^2 where the O(U) truncation breaks down.
  struct RangeWarning {
    int mode;
    double flow_time;
    double value;
  };
  std::vector<RangeWarning> range_warnings;

  int n_modes() const { return static_cast<int>(h.size()); }
};

inline std::size_t m_index(int n, int l, int pp, int qp, int p) {
  return ((std::size_t(l) * n + pp) * n + qp) * n + p;
}

// Fully coherent initialization at B = 0: h = 1, M = 0.
FlowState coherent_init(int n_modes);

struct StepperConfig {
  double rel_tol = 1e-10;  // local error per step, relative
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  long max_steps = 2000000;
};

// Truncated O(U) right-hand side; the returned state's h and m fields hold
// dh/dB and dM/dB. Grid occupations must be filled (mode_grid).
FlowState flow_rhs(const FlowState& state, const ModeGrid& grid, double u);

// Advances the system to b_target with an adaptive embedded Runge-Kutta
// 5(4) stepper. Intended for small grids (state size N + N^4). Throws
// std::runtime_error on step-size underflow (stiffness), reporting the B
// reached; range excursions of h are recorded on the returned state.
FlowState integrate_flow(const FlowState& init, const ModeGrid& grid, double u,
                         double b_target, const StepperConfig& sc = {});

// M = U (1 - e^{-B Delta^2}) / Delta; the Delta = 0 limit is 0.
double m_closed_form_delta(double delta, double u, double b_time);
double m_closed_form(const ModeGrid& grid, int l, int pp, int qp, int p,
                     double u, double b_time);

// Exact solution of the truncated system on the grid:
// h_l(B) = 1 - U^2 sum_{l+p=p'+q'} Q * [(1-e^{-B D^2}) - (1-e^{-2B D^2})/2]/D^2.
// The single-exponential kernel (1-e^{-B D^2})/(2 D^2) is only the B->infinity
// plateau of this expression.
double h_closed_form_discrete(const ModeGrid& grid, int l, double u,
                              double b_time);

// Continuum form: h = 1 - U^2 rho(mu)^3 int_band dE (E-mu)^2/(E-eps_l)^2
// * (1 - e^{-B(E-eps_l)^2}), integrated over the band E in [-2, 2] with a
// split at E = eps_l (the numerator regularizes the double pole; no
// principal value needed). Decreasing in B, equals 1 at B = 0.
double h_closed_form(double eps_l, double u, double mu, double b_time,
                     const QuadratureConfig& cfg = {});

// Z = h_{k_F}^2; h outside (0, 1] signals perturbative breakdown and is a
// domain error here.
double quasiparticle_residue(double h_at_fermi);

struct ResidueCurve {
  struct Point {
    double b_time;
    double h_fermi;
    double z;
  };
  std::vector<Point> points;  // ascending in B
};

// h at the Fermi energy (eps_l = mu) from the continuum closed form, for
// each requested flow time. The momentum-conserving discrete sum has no
// open phase space at the Fermi mode (h_{k_F} = 1 identically on finite
// grids), so the physical residue curve comes from the E-integral.
ResidueCurve residue_curve(double u, double mu,
                           const std::vector<double>& b_values,
                           const QuadratureConfig& cfg = {});

}  // namespace flowent
