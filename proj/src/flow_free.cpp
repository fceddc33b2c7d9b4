#include "flowent/flow_free.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace flowent {

namespace {

constexpr double kPi = std::numbers::pi;

// e^{-x} is negligible against the kept terms beyond this exponent.
constexpr double kExpCutoff = 46.0;

void check_grid(const ModeGrid& grid, const char* which) {
  if (grid.size() == 0)
    throw std::invalid_argument(std::string("eta_coefficients: empty grid ") +
                                which);
  if (grid.energies.size() != grid.momenta.size())
    throw std::invalid_argument(
        std::string("eta_coefficients: grid ") + which +
        " does not carry one energy per momentum");
  for (int i = 0; i < grid.size(); ++i) {
    if (grid.energies[i] != dispersion(grid.momenta[i]))
      throw std::invalid_argument(
          std::string("eta_coefficients: grid ") + which +
          " energies do not match the dispersion (mismatched conventions)");
  }
}

// Occupation-gated pair weights, sorted by rising energy gap so evaluation
// at large B can stop at the Gaussian cutoff.
struct PairTable {
  std::vector<double> dsq;     // (e_l - e_m)^2, ascending, > 0
  std::vector<double> weight;  // c^2 sin^2 k_l sin^2 k_m (e_l - e_m)^2
};

PairTable build_pair_table(const LatticeModel& model) {
  const ModeGrid ga = mode_grid(model.n_sites_a, model.mu);
  const ModeGrid gb = mode_grid(model.n_sites_b, model.mu);
  const double c = 2.0 * model.g /
                   std::sqrt(double(model.n_sites_a + 1) *
                             double(model.n_sites_b + 1));
  const double c2 = c * c;

  PairTable table;
  table.dsq.reserve(size_t(ga.size()) * gb.size() / 2);
  table.weight.reserve(table.dsq.capacity());
  for (int i = 0; i < ga.size(); ++i) {
    const double si = std::sin(ga.momenta[i]);
    const double wi = c2 * si * si;
    for (int j = 0; j < gb.size(); ++j) {
      if (ga.occupations[i] == gb.occupations[j]) continue;  // Pauli-blocked
      const double de = ga.energies[i] - gb.energies[j];
      const double d2 = de * de;
      if (d2 == 0.0) continue;  // degenerate pair carries zero amplitude
      const double sj = std::sin(gb.momenta[j]);
      table.dsq.push_back(d2);
      table.weight.push_back(wi * sj * sj * d2);
    }
  }

  std::vector<int> order(table.dsq.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&table](int a, int b) {
    return table.dsq[a] < table.dsq[b];
  });
  PairTable sorted;
  sorted.dsq.resize(order.size());
  sorted.weight.resize(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    sorted.dsq[i] = table.dsq[order[i]];
    sorted.weight[i] = table.weight[order[i]];
  }
  return sorted;
}

// sum_i w_i e^{-2 B d_i}, truncated where the exponential underflows the sum.
double pair_sum(const PairTable& table, double b_time) {
  const double dmax = kExpCutoff / (2.0 * b_time);
  const auto end =
      std::upper_bound(table.dsq.begin(), table.dsq.end(), dmax);
  const size_t n = size_t(end - table.dsq.begin());
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i)
    acc += table.weight[i] * std::exp(-2.0 * b_time * table.dsq[i]);
  return acc;
}

// int_{b0}^{b1} B e^{-xB} dB for x > 0.
double b_moment(double x, double b0, double b1) {
  const double inv = 1.0 / x;
  const double lo = (b0 * inv + inv * inv) * std::exp(-x * b0);
  const double hi = (b1 * inv + inv * inv) * std::exp(-x * b1);
  return lo - hi;
}

void check_flow_args(double lambda, double l) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("min_entropy_flow: lambda must be > 0");
  if (!(l > 1.0))
    throw std::invalid_argument("min_entropy_flow: l must be > 1");
}

}  // namespace

EtaCoefficients eta_coefficients(const LatticeModel& model,
                                 const ModeGrid& grid_a, const ModeGrid& grid_b,
                                 double b_time, double residue_scale) {
  model.validate();
  if (!(b_time >= 0.0))
    throw std::invalid_argument("eta_coefficients: B must be >= 0");
  check_grid(grid_a, "A");
  check_grid(grid_b, "B");

  const double c = 2.0 * model.g /
                   std::sqrt(double(grid_a.size() + 1) *
                             double(grid_b.size() + 1));
  EtaCoefficients eta;
  eta.flow_time = b_time;
  eta.residue_scale = residue_scale;
  eta.amplitudes.resize(grid_a.size(), grid_b.size());
  for (int i = 0; i < grid_a.size(); ++i) {
    const double si = std::sin(grid_a.momenta[i]);
    for (int j = 0; j < grid_b.size(); ++j) {
      const double de = grid_a.energies[i] - grid_b.energies[j];
      eta.amplitudes(i, j) = c * residue_scale * si *
                             std::sin(grid_b.momenta[j]) *
                             std::exp(-b_time * de * de) * de;
    }
  }
  return eta;
}

double eta_squared_expectation(const EtaCoefficients& eta,
                               const std::vector<int>& occ_a,
                               const std::vector<int>& occ_b, bool spinful) {
  if (int(occ_a.size()) != int(eta.amplitudes.rows()) ||
      int(occ_b.size()) != int(eta.amplitudes.cols()))
    throw std::invalid_argument(
        "eta_squared_expectation: occupations do not match the amplitude "
        "matrix");
  double acc = 0.0;
  for (int i = 0; i < eta.amplitudes.rows(); ++i) {
    for (int j = 0; j < eta.amplitudes.cols(); ++j) {
      if (occ_a[i] == occ_b[j]) continue;
      const double amp = eta.amplitudes(i, j);
      acc += amp * amp;
    }
  }
  return -(spinful ? 2.0 : 1.0) * acc;
}

double min_entropy_flow(const LatticeModel& model, double lambda, double l,
                        const QuadratureConfig& cfg) {
  model.validate();
  check_flow_args(lambda, l);

  const PairTable table = build_pair_table(model);
  const double spin = model.spinful ? 2.0 : 1.0;
  const double t0 = -2.0 * std::log(lambda);
  const double t1 = 2.0 * (std::log(l) - std::log(lambda));

  // S = -4 int B <eta^2> dB = 4 spin int e^{2t} sum_i w_i e^{-2 e^t d_i} dt.
  auto integrand = [&table](double t) {
    const double b = std::exp(t);
    return std::exp(2.0 * t) * pair_sum(table, b);
  };

  double raw;
  try {
    raw = integrate_1d(integrand, t0, t1, cfg).value;
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string("min_entropy_flow: ") + e.what(),
                         4.0 * spin * e.partial_value(),
                         4.0 * spin * e.error_estimate());
  }
  const double s = 4.0 * spin * raw;
  return s < 0.0 ? 0.0 : s;  // nonneg integrand; clip quadrature roundoff
}

double min_entropy_flow_pair_sum(const LatticeModel& model, double lambda,
                                 double l) {
  model.validate();
  check_flow_args(lambda, l);

  const PairTable table = build_pair_table(model);
  const double b0 = 1.0 / (lambda * lambda);
  const double b1 = (l / lambda) * (l / lambda);
  double acc = 0.0;
  for (size_t i = 0; i < table.dsq.size(); ++i)
    acc += table.weight[i] * b_moment(2.0 * table.dsq[i], b0, b1);
  return 4.0 * (model.spinful ? 2.0 : 1.0) * acc;
}

FitResult fit_scaling(const EntropyScan& scan, FitModel model) {
  const auto& pts = scan.points;
  if (pts.size() < 4)
    throw std::invalid_argument("fit_scaling: needs at least 4 points");

  std::vector<double> x(pts.size()), y(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    const double l = pts[i].first;
    const double s = pts[i].second;
    switch (model) {
      case FitModel::log_l:
        x[i] = std::log(l);
        y[i] = s;
        break;
      case FitModel::inverse_l:
        x[i] = 1.0 / l;
        y[i] = s;
        break;
      case FitModel::power_law:
        if (!(s > 0.0))
          throw std::runtime_error(
              "fit_scaling: power_law requires positive entropies");
        x[i] = std::log(l);
        y[i] = std::log(s);
        break;
    }
  }

  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0)
    throw std::runtime_error("fit_scaling: degenerate design matrix");

  FitResult fit;
  fit.model = model;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

double min_entropy_2d(const LatticeModel& model, int n_y, double lambda,
                      double l, const QuadratureConfig& cfg) {
  if (n_y < 1) throw std::invalid_argument("min_entropy_2d: n_y must be >= 1");
  double total = 0.0;
  for (int j = 1; j <= n_y; ++j) {
    const double ky = kPi * j / (n_y + 1);
    const double mu_eff = model.mu + 2.0 * std::cos(ky);
    if (std::abs(mu_eff) >= 2.0) continue;  // empty or full channel
    LatticeModel channel = model;
    channel.mu = mu_eff;
    total += min_entropy_flow(channel, lambda, l, cfg);
  }
  return total;
}

double log_slope_closed_form(double g, double mu) {
  return g * g * (4.0 / (kPi * kPi)) * (1.0 - mu * mu / 4.0);
}

double channel_slope_closed_form(double g, double mu, int n_y) {
  if (!(mu >= 0.0 && mu <= 4.0))
    throw std::domain_error(
        "channel_slope_closed_form: defined for mu in [0, 4]");
  const double root = std::sqrt(mu - mu * mu / 4.0);
  const double bracket =
      (2.0 - mu * mu) * std::asin(mu / 2.0 - 1.0) + root * (6.0 * mu - 4.0);
  return g * g * n_y / (2.0 * kPi * kPi * kPi) * bracket;
}

}  // namespace flowent
