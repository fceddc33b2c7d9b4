#include "flowent/lattice.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace flowent {

void LatticeModel::validate() const {
  if (n_sites_a < 1 || n_sites_b < 1)
    throw std::invalid_argument("LatticeModel: subsystem sizes must be >= 1");
  if (!(g >= 0.0 && g <= 1.0))
    throw std::invalid_argument("LatticeModel: g must lie in [0, 1]");
  if (!(mu >= -2.0 && mu <= 2.0))
    throw std::invalid_argument("LatticeModel: mu must lie in the band [-2, 2]");
}

ModeGrid momentum_grid(int n_sites) {
  if (n_sites < 1)
    throw std::domain_error("momentum_grid: n_sites must be >= 1, got " +
                            std::to_string(n_sites));
  ModeGrid grid;
  grid.momenta.resize(n_sites);
  grid.energies.resize(n_sites);
  for (int n = 1; n <= n_sites; ++n) {
    const double k = std::numbers::pi * n / (n_sites + 1);
    grid.momenta[n - 1] = k;
    grid.energies[n - 1] = dispersion(k);
  }
  return grid;
}

ModeGrid mode_grid(int n_sites, double mu) {
  ModeGrid grid = momentum_grid(n_sites);
  grid.occupations.resize(n_sites);
  for (int i = 0; i < n_sites; ++i)
    grid.occupations[i] = occupation(grid.energies[i], mu);
  return grid;
}

double dispersion(double k) { return -2.0 * std::cos(k); }

int occupation(double energy, double mu) { return energy <= mu ? 1 : 0; }

double density_of_states(double energy) {
  const double arg = 4.0 - energy * energy;
  if (!(arg > 0.0))
    throw std::domain_error(
        "density_of_states: diverges at the band edge, |energy| >= 2");
  return 1.0 / std::sqrt(arg);
}

}  // namespace flowent
