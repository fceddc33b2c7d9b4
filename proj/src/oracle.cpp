#include "flowent/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flowent {

namespace {

// Eigensolver noise tolerated outside [0,1] before clamping is refused.
constexpr double kClampWindow = 1e-8;

double clamp_occupation(double nu) {
  if (nu < -kClampWindow || nu > 1.0 + kClampWindow)
    throw std::runtime_error(
        "subsystem_spectrum: eigenvalue " + std::to_string(nu) +
        " outside [0,1] beyond the noise window");
  return std::clamp(nu, 0.0, 1.0);
}

}  // namespace

CorrelationMatrix ground_state_correlations(const LatticeModel& model) {
  model.validate();
  if (model.u != 0.0)
    throw std::invalid_argument(
        "ground_state_correlations: exact only for quadratic Hamiltonians "
        "(u = 0)");
  if (model.spinful)
    throw std::invalid_argument(
        "ground_state_correlations: computes one species; apply spin "
        "degeneracy at the scan layer");

  const int n = model.n_sites_a + model.n_sites_b;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double t = (i == model.n_sites_a - 1) ? model.g : 1.0;
    h(i, i + 1) = -t;
    h(i + 1, i) = -t;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("ground_state_correlations: eigensolver failed");

  // Levels are ascending; fill while eps <= mu (tie occupied).
  const auto& eps = solver.eigenvalues();
  int n_occ = 0;
  while (n_occ < n && occupation(eps[n_occ], model.mu) == 1) ++n_occ;

  CorrelationMatrix c;
  c.n_occupied = n_occ;
  if (n_occ == 0) {
    c.entries = Eigen::MatrixXd::Zero(n, n);
  } else {
    const Eigen::MatrixXd phi = solver.eigenvectors().leftCols(n_occ);
    c.entries = phi * phi.transpose();
  }
  return c;
}

EntanglementSpectrum subsystem_spectrum(const CorrelationMatrix& c,
                                        const std::vector<int>& region) {
  if (region.empty())
    throw std::domain_error("subsystem_spectrum: empty region");
  const int n = static_cast<int>(c.entries.rows());
  const int m = static_cast<int>(region.size());
  Eigen::MatrixXd block(m, m);
  for (int i = 0; i < m; ++i) {
    if (region[i] < 0 || region[i] >= n)
      throw std::domain_error("subsystem_spectrum: site index out of bounds");
    for (int j = 0; j < m; ++j) block(i, j) = c.entries(region[i], region[j]);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("subsystem_spectrum: eigensolver failed");

  EntanglementSpectrum spec;
  spec.mode_occupations.resize(m);
  for (int i = 0; i < m; ++i)
    spec.mode_occupations[i] = clamp_occupation(solver.eigenvalues()[i]);
  return spec;
}

EntanglementSpectrum subsystem_spectrum(const CorrelationMatrix& c,
                                        int region_size) {
  std::vector<int> region(static_cast<std::size_t>(std::max(region_size, 0)));
  for (int i = 0; i < region_size; ++i) region[i] = i;
  return subsystem_spectrum(c, region);
}

double renyi_entropy(const EntanglementSpectrum& spec, double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0)
    throw std::domain_error(
        "renyi_entropy: requires alpha > 0, alpha != 1 (von Neumann limit "
        "out of scope)");
  double s = 0.0;
  for (double nu : spec.mode_occupations) {
    if (nu == 0.0 || nu == 1.0) continue;  // pure mode contributes 0
    s += std::log(std::pow(nu, alpha) + std::pow(1.0 - nu, alpha));
  }
  return s / (1.0 - alpha);
}

double min_entropy(const EntanglementSpectrum& spec) {
  double s = 0.0;
  for (double nu : spec.mode_occupations) s -= std::log(std::max(nu, 1.0 - nu));
  return s;
}

}  // namespace flowent
