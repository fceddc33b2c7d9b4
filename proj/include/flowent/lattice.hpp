#pragma once

// Bipartite weak-link lattice models: open-chain momentum grids, the
// tight-binding dispersion, zero-temperature occupations, and the 1D
// density of states. Hopping t = 1 fixes all energy units.

#include <stdexcept>
#include <vector>

namespace flowent {

struct LatticeModel {
  int n_sites_a = 1;      // sites in subsystem A
  int n_sites_b = 1;      // sites in subsystem B
  double g = 0.0;         // weak-link amplitude, [0, 1]; g = 1 restores the uniform chain
  double u = 0.0;         // on-site interaction (Hubbard U)
  double mu = 0.0;        // chemical potential, within the band [-2, 2]
  bool spinful = false;   // true: two degenerate spin species

  void validate() const;  // throws std::invalid_argument
};

// Open-boundary standing-wave modes k_n = pi*n/(N+1), n = 1..N, with their
// energies and zero-temperature occupations. Immutable after construction.
struct ModeGrid {
  std::vector<double> momenta;
  std::vector<double> energies;
  std::vector<int> occupations;  // empty until assigned via mode_grid()

  int size() const { return static_cast<int>(momenta.size()); }
};

// Momenta (and energies through the dispersion) only; occupations left empty.
ModeGrid momentum_grid(int n_sites);

// Full grid: momenta, energies, occupations at chemical potential mu.
ModeGrid mode_grid(int n_sites, double mu);

// eps(k) = -2 cos k on k in [0, pi].
double dispersion(double k);

// Zero-temperature step; the tie energy == mu counts occupied.
int occupation(double energy, double mu);

// rho(eps) = 1/sqrt(4 - eps^2); throws std::domain_error at |eps| >= 2
// where the band-edge divergence sits.
double density_of_states(double energy);

}  // namespace flowent
