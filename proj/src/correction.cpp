#include "flowent/correction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace flowent {

namespace {

constexpr double kPi = std::numbers::pi;

// Tighter tolerances for the inner integrals of nested quadratures so the
// outer error estimate stays meaningful.
QuadratureConfig tighten(const QuadratureConfig& cfg, double factor) {
  QuadratureConfig inner = cfg;
  inner.rel_tol = std::max(cfg.rel_tol * factor, 1e-13);
  inner.abs_tol = std::max(cfg.abs_tol * factor, 1e-15);
  return inner;
}

void check_windows(const std::vector<double>& windows) {
  if (windows.empty())
    throw std::invalid_argument("correction: empty window list");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (!(windows[i] > 0.0) || (i > 0 && !(windows[i] < windows[i - 1])))
      throw std::invalid_argument(
          "correction: windows must be positive and strictly decreasing");
  }
}

// Regulator kernel (1 - e^{-s v^2})^2 / v^2, s = B^{alpha - 1}; vanishes
// quadratically at v = 0, which is what tames the second-order pole.
double regulator_kernel(double v, double s) {
  const double v2 = v * v;
  const double x = s * v2;
  if (x < 1e-8) return s * s * v2 * (1.0 - x);
  const double t = -std::expm1(-x);
  return t * t / v2;
}

// int_{b0}^{b1} B e^{-xB} dB; x = 0 is the polynomial limit.
double b_moment(double x, double b0, double b1) {
  if (x == 0.0) return 0.5 * (b1 * b1 - b0 * b0);
  const double inv = 1.0 / x;
  return (b0 * inv + inv * inv) * std::exp(-x * b0) -
         (b1 * inv + inv * inv) * std::exp(-x * b1);
}

}  // namespace

void CorrectionInput::validate() const {
  if (!(lambda > 0.0))
    throw std::invalid_argument("CorrectionInput: lambda must be > 0");
  if (!(l > 1.0))
    throw std::invalid_argument("CorrectionInput: l must be > 1");
  if (!(rho_mu > 0.0))
    throw std::invalid_argument("CorrectionInput: rho_mu must be > 0");
}

CorrectionInput make_correction_input(double g, double u, double mu,
                                      double lambda, double l) {
  CorrectionInput inp;
  inp.g = g;
  inp.u = u;
  inp.mu = mu;
  inp.lambda = lambda;
  inp.l = l;
  inp.rho_mu = density_of_states(mu);
  inp.validate();
  return inp;
}

void RegularizationSchedule::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument(
        "RegularizationSchedule: alpha must lie in (0, 1)");
  if (!(eps0 > 0.0))
    throw std::invalid_argument("RegularizationSchedule: eps0 must be > 0");
}

double correction_prefactor(const CorrectionInput& inp) {
  return 3.0 * inp.g * inp.g * inp.u * inp.u * inp.rho_mu /
         (kPi * kPi * std::sqrt(2.0 * kPi));
}

double correction_integrand(double e, double eps_l) {
  if (!(e >= 0.0))
    throw std::invalid_argument("correction_integrand: E must be >= 0");
  const double den = e + eps_l;
  if (den == 0.0)
    throw std::domain_error(
        "correction_integrand: second-order pole at E = -eps_l");
  return e * e * erfc(e) / (den * den);
}

std::vector<std::pair<double, double>> delta_s_unregularized(
    const CorrectionInput& inp, const std::vector<double>& windows,
    const QuadratureConfig& cfg) {
  inp.validate();
  check_windows(windows);

  // In the shifted variable u = E + eps_l the excluded-window integral of
  // 1/u^2 over the full line is the same for every E, so the double
  // integral factorizes exactly: (int_0^inf E^2 erfc E) * (int_{|u|>d} u^-2).
  // Both factors are still evaluated by quadrature; the closed values
  // 1/(3 sqrt(pi)) and 2/delta serve as test oracles.
  QuadratureConfig tail = cfg;
  tail.semi_infinite_map = SemiInfiniteMap::rational;  // polynomial 1/u^2 tail

  const double moment =
      integrate_semi_infinite([](double e) { return e * e * erfc(e); }, 0.0,
                              cfg)
          .value;
  const double b_factor = 2.0 * inp.lambda * (1.0 - 1.0 / inp.l);
  const double pref = correction_prefactor(inp);

  std::vector<std::pair<double, double>> scan;
  scan.reserve(windows.size());
  for (double delta : windows) {
    try {
      const double window_integral =
          2.0 * integrate_semi_infinite(
                    [](double v) { return 1.0 / (v * v); }, delta, tail)
                    .value;
      scan.emplace_back(delta, pref * b_factor * moment * window_integral);
    } catch (const NonConvergence& e) {
      throw std::runtime_error(
          "delta_s_unregularized: window integral failed at delta=" +
          std::to_string(delta) + ": " + e.what());
    }
  }
  return scan;
}

double erfc_moment(double eps) {
  const double rpi = std::sqrt(kPi);
  return 2.0 / (5.0 * rpi) - (3.0 / 8.0) * eps + eps * eps / (3.0 * rpi);
}

double delta_s_regularized(const CorrectionInput& inp,
                           const RegularizationSchedule& sched,
                           const QuadratureConfig& cfg, double exclusion) {
  inp.validate();
  sched.validate();
  if (exclusion < 0.0)
    throw std::invalid_argument("delta_s_regularized: exclusion must be >= 0");

  const QuadratureConfig cfg_eps = tighten(cfg, 0.1);
  QuadratureConfig cfg_e = tighten(cfg, 0.01);
  cfg_e.semi_infinite_map = SemiInfiniteMap::rational;

  // Innermost: E over [0, inf) excluding the window around eps.
  auto e_integral = [&](double eps, double s) {
    auto kernel = [eps, s](double e) {
      return e * e * erfc(e) * regulator_kernel(e - eps, s);
    };
    double acc = 0.0;
    const double lo_end = eps - exclusion;
    if (lo_end > 0.0) acc += integrate_1d(kernel, 0.0, lo_end, cfg_e).value;
    acc += integrate_semi_infinite(kernel, eps + exclusion, cfg_e).value;
    return acc;
  };

  // Middle: eps over [0, sqrt(2B) eps0]; outer: B = e^t.
  auto b_integrand = [&](double t) {
    const double b = std::exp(t);
    const double s = std::pow(b, sched.alpha - 1.0);
    const double eps_top = std::sqrt(2.0 * b) * sched.eps0;
    const double inner =
        integrate_1d([&](double eps) { return e_integral(eps, s); }, 0.0,
                     eps_top, cfg_eps)
            .value;
    // dB B^{-3/2} = e^{-t/2} dt
    return std::exp(-0.5 * t) * inner;
  };

  const double t0 = -2.0 * std::log(inp.lambda);
  const double t1 = 2.0 * (std::log(inp.l) - std::log(inp.lambda));
  try {
    return integrate_1d(b_integrand, t0, t1, cfg).value;
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string("delta_s_regularized: ") + e.what(),
                         e.partial_value(), e.error_estimate());
  }
}

double leading_scaling(double alpha, double lambda, double l) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("leading_scaling: alpha must lie in (0, 1)");
  if (!(lambda > 0.0) || !(l > 0.0))
    throw std::invalid_argument("leading_scaling: lambda and l must be > 0");
  const double s = 2.0 * alpha - 1.0;
  if (std::abs(s) < 1e-9) return 2.0 * std::log(l);
  return std::pow(lambda, -2.0 * s) * (std::pow(l, 2.0 * s) - 1.0) / s;
}

CorrectionSweep delta_s_full(const CorrectionInput& inp,
                             const RegularizationSchedule& sched,
                             const std::vector<double>& l_values,
                             const QuadratureConfig& cfg) {
  if (l_values.size() < 2)
    throw std::invalid_argument("delta_s_full: needs at least 2 lengths");
  std::vector<double> ls = l_values;
  std::sort(ls.begin(), ls.end());

  CorrectionSweep sweep;
  sweep.points.reserve(ls.size());
  for (double l : ls) {
    CorrectionInput point = inp;
    point.l = l;
    const double value =
        correction_prefactor(point) * delta_s_regularized(point, sched, cfg);
    sweep.points.emplace_back(l, value);
  }

  if (ls.size() >= 4) {
    EntropyScan diffs;
    const double tail = sweep.points.back().second;
    for (const auto& [l, v] : sweep.points)
      diffs.points.emplace_back(l, v - tail);
    sweep.fit = fit_scaling(diffs, FitModel::inverse_l);
  }
  return sweep;
}

double delta_s_mode_sum(const LatticeModel& model, double lambda, double l) {
  model.validate();
  if (!(lambda > 0.0) || !(l > 1.0))
    throw std::invalid_argument("delta_s_mode_sum: requires lambda > 0, l > 1");

  const ModeGrid ga = mode_grid(model.n_sites_a, model.mu);
  const ModeGrid gb = mode_grid(model.n_sites_b, model.mu);
  const int na = ga.size();
  const int nb = gb.size();
  const double c2 = 4.0 * model.g * model.g / (double(na + 1) * (nb + 1));
  const double b0 = 1.0 / (lambda * lambda);
  const double b1 = (l / lambda) * (l / lambda);
  const double u2 = model.u * model.u;

  double acc = 0.0;
  for (int m = 0; m < nb; ++m) {
    const double sm = std::sin(gb.momenta[m]);
    const double nm = gb.occupations[m];
    for (int pp = 0; pp < na; ++pp) {
      for (int qp = 0; qp < na; ++qp) {
        for (int p = 0; p < na; ++p) {
          if (p == pp || p == qp) continue;  // trilinear self-contraction
          const int lt = pp + qp - p;  // momentum bookkeeping fixes l
          if (lt < 0 || lt >= na) continue;
          const double occ4 =
              ga.occupations[pp] * ga.occupations[qp] *
                  (1.0 - ga.occupations[p]) * (1.0 - nm) +
              (1.0 - ga.occupations[pp]) * (1.0 - ga.occupations[qp]) *
                  ga.occupations[p] * nm;
          if (occ4 == 0.0) continue;
          const double delta =
              ga.energies[pp] - ga.energies[p] + ga.energies[qp] -
              ga.energies[lt];
          if (delta == 0.0) continue;  // M vanishes on resonant channels
          const double egen = delta + ga.energies[lt] - gb.energies[m];
          if (egen == 0.0) continue;   // Gaussian vertex carries egen^2
          const double sl = std::sin(ga.momenta[lt]);
          const double weight = c2 * sl * sl * sm * sm;
          const double e2 = egen * egen;
          const double d2 = delta * delta;
          // B-integral of B M(B)^2 egen^2 e^{-2 B egen^2} in closed form:
          // M^2 = (U^2/D^2)(1 - 2 e^{-B D^2} + e^{-2B D^2}).
          const double bint = b_moment(2.0 * e2, b0, b1) -
                              2.0 * b_moment(2.0 * e2 + d2, b0, b1) +
                              b_moment(2.0 * e2 + 2.0 * d2, b0, b1);
          acc += weight * occ4 * e2 * (u2 / d2) * bint;
        }
      }
    }
  }
  return 4.0 * (model.spinful ? 2.0 : 1.0) * acc;
}

}  // namespace flowent
