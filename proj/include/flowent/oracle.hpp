#pragma once

// Exact free-fermion entanglement oracle. Builds the ground-state
// correlation matrix of the weak-link chain, extracts the entanglement
// spectrum of a subregion, and evaluates the Renyi family and the
// min-entropy. Exact for quadratic Hamiltonians only (u = 0); serves as
// ground truth for the flow engine at small g. Entropies in nats.

#include <Eigen/Dense>

#include <vector>

#include "flowent/lattice.hpp"

namespace flowent {

struct CorrelationMatrix {
  Eigen::MatrixXd entries;  // C_ij = <c^dag_i c_j>, symmetric, spectrum in [0,1]
  int n_occupied = 0;       // trace(C) = number of filled levels
};

struct EntanglementSpectrum {
  std::vector<double> mode_occupations;  // eigenvalues of C restricted to A, clamped to [0,1]
};

// Single-particle hopping matrix of H_A + H_B + g*H_ent (open chain, weak
// bond g between sites n_sites_a-1 and n_sites_a), filled up to model.mu
// with the lattice tie-break. Throws std::invalid_argument for u != 0 or
// spinful models: the oracle handles one quadratic species.
CorrelationMatrix ground_state_correlations(const LatticeModel& model);

// Eigenvalues of the principal submatrix C[region, region].
EntanglementSpectrum subsystem_spectrum(const CorrelationMatrix& c,
                                        const std::vector<int>& region);

// Contiguous region [0, region_size) - the subsystem-A block.
EntanglementSpectrum subsystem_spectrum(const CorrelationMatrix& c,
                                        int region_size);

// S_alpha = sum_j 1/(1-alpha) log(nu^alpha + (1-nu)^alpha), alpha > 0,
// alpha != 1 (the von Neumann limit is out of scope).
double renyi_entropy(const EntanglementSpectrum& spec, double alpha);

// S_min = -sum_j log(max(nu_j, 1-nu_j)) = -log of the largest eigenvalue
// of the reduced density matrix; the alpha -> infinity Renyi limit.
double min_entropy(const EntanglementSpectrum& spec);

}  // namespace flowent
