#include "flowent/hubbard_flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flowent {

namespace {

void check_grid_state(const FlowState& state, const ModeGrid& grid,
                      const char* who) {
  const int n = grid.size();
  if (grid.occupations.size() != grid.momenta.size())
    throw std::invalid_argument(std::string(who) +
                                ": grid occupations not filled");
  if (state.n_modes() != n ||
      state.m.size() != std::size_t(n) * n * n * n)
    throw std::invalid_argument(std::string(who) +
                                ": state dimensions do not match the grid");
}

// Momentum-conserving channel feeding dh_l/dB.
struct Channel {
  std::size_t idx;  // position in the rank-4 M layout
  double delta;
  double q;
};

// Energy gaps for every (l, p', q', p) plus the masked channel lists.
// The mask l + p = p' + q' is on mode indices; it is base-independent
// since the offsets cancel pairwise.
struct FlowTables {
  int n;
  std::vector<double> delta;               // rank-4
  std::vector<std::vector<Channel>> open;  // per target mode l
};

FlowTables build_tables(const ModeGrid& grid) {
  const int n = grid.size();
  FlowTables tables;
  tables.n = n;
  tables.delta.resize(std::size_t(n) * n * n * n);
  tables.open.resize(n);
  const auto& e = grid.energies;
  const auto& occ = grid.occupations;
  for (int l = 0; l < n; ++l) {
    for (int pp = 0; pp < n; ++pp) {
      for (int qp = 0; qp < n; ++qp) {
        const double epq = e[pp] + e[qp];
        for (int p = 0; p < n; ++p) {
          const std::size_t idx = m_index(n, l, pp, qp, p);
          tables.delta[idx] = epq - e[p] - e[l];
          if (l + p == pp + qp) {
            const double q =
                occ[pp] * occ[qp] * (1.0 - occ[p]) +
                (1.0 - occ[pp]) * (1.0 - occ[qp]) * occ[p];
            if (q != 0.0)
              tables.open[l].push_back({idx, tables.delta[idx], q});
          }
        }
      }
    }
  }
  return tables;
}

void rhs_into(const FlowTables& tables, double u, double b_time,
              const double* m, double* dh, double* dm) {
  const std::size_t total = tables.delta.size();
  for (std::size_t i = 0; i < total; ++i) {
    const double d = tables.delta[i];
    dm[i] = u * d * std::exp(-b_time * d * d);
  }
  for (int l = 0; l < tables.n; ++l) {
    double acc = 0.0;
    for (const Channel& ch : tables.open[l])
      acc += m[ch.idx] * ch.delta * std::exp(-b_time * ch.delta * ch.delta) *
             ch.q;
    dh[l] = -u * acc;
  }
}

// Dormand-Prince 5(4) tableau; row 6 of kA doubles as the 5th-order weights.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384,     0.0,          500.0 / 1113,
                           125.0 / 192,    -2187.0 / 6784, 11.0 / 84,
                           0.0};
constexpr double kB4[7] = {5179.0 / 57600, 0.0,          7571.0 / 16695,
                           393.0 / 640,    -92097.0 / 339200,
                           187.0 / 2100,   1.0 / 40};

// 1 - e^{-x} without cancellation.
double one_minus_exp(double x) { return -std::expm1(-x); }

// G(delta, B) = [(1 - e^{-B d^2}) - (1 - e^{-2B d^2})/2] / d^2, the
// two-exponential kernel solving the truncated h equation; -> 0 as d -> 0.
double h_kernel(double delta, double b_time) {
  const double d2 = delta * delta;
  const double x = b_time * d2;
  if (x < 1e-6) {
    // f(x) = x^2/2 - x^3/2 + (7/24) x^4 + O(x^5); G = f / d^2.
    return b_time * b_time * d2 * (0.5 + x * (-0.5 + x * (7.0 / 24.0)));
  }
  return (one_minus_exp(x) - 0.5 * one_minus_exp(2.0 * x)) / d2;
}

// (1 - e^{-B v^2}) / v^2 with the finite v -> 0 limit B.
double pole_kernel(double v, double b_time) {
  const double v2 = v * v;
  const double x = b_time * v2;
  if (x < 1e-8) return b_time * (1.0 - 0.5 * x + x * x / 6.0);
  return one_minus_exp(x) / v2;
}

}  // namespace

FlowState coherent_init(int n_modes) {
  if (n_modes < 1)
    throw std::invalid_argument("coherent_init: n_modes must be >= 1");
  FlowState state;
  state.flow_time = 0.0;
  state.h.assign(n_modes, 1.0);
  state.m.assign(std::size_t(n_modes) * n_modes * n_modes * n_modes, 0.0);
  return state;
}

FlowState flow_rhs(const FlowState& state, const ModeGrid& grid, double u) {
  check_grid_state(state, grid, "flow_rhs");
  const FlowTables tables = build_tables(grid);
  FlowState deriv;
  deriv.flow_time = state.flow_time;
  deriv.h.assign(state.h.size(), 0.0);
  deriv.m.assign(state.m.size(), 0.0);
  rhs_into(tables, u, state.flow_time, state.m.data(), deriv.h.data(),
           deriv.m.data());
  return deriv;
}

FlowState integrate_flow(const FlowState& init, const ModeGrid& grid, double u,
                         double b_target, const StepperConfig& sc) {
  check_grid_state(init, grid, "integrate_flow");
  if (!(b_target >= init.flow_time))
    throw std::invalid_argument(
        "integrate_flow: b_target must be >= the initial flow time");

  FlowState state = init;
  if (u == 0.0 || b_target == init.flow_time) {
    state.flow_time = b_target;
    return state;
  }

  const FlowTables tables = build_tables(grid);
  const int n = grid.size();
  const std::size_t dim = std::size_t(n) + state.m.size();

  // Flat state vector: h first, then M.
  std::vector<double> y(dim);
  std::copy(state.h.begin(), state.h.end(), y.begin());
  std::copy(state.m.begin(), state.m.end(), y.begin() + n);

  auto eval_rhs = [&](double b, const std::vector<double>& yy,
                      std::vector<double>& out) {
    rhs_into(tables, u, b, yy.data() + n, out.data(), out.data() + n);
  };

  std::vector<std::vector<double>> k(7, std::vector<double>(dim));
  std::vector<double> ytmp(dim), ynew(dim);

  double b = state.flow_time;
  double step = std::min(sc.initial_step, b_target - b);
  eval_rhs(b, y, k[0]);

  std::vector<char> warned(n, 0);
  for (const auto& w : state.range_warnings)
    if (w.mode >= 0 && w.mode < n) warned[w.mode] = 1;

  long steps = 0;
  while (b < b_target) {
    if (++steps > sc.max_steps)
      throw std::runtime_error(
          "integrate_flow: step budget exhausted at B = " + std::to_string(b));
    step = std::min(step, b_target - b);
    if (step < 1e-14 * std::max(1.0, std::abs(b)))
      throw std::runtime_error(
          "integrate_flow: step size underflow (stiffness) at B = " +
          std::to_string(b));

    for (int stage = 1; stage < 7; ++stage) {
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (int j = 0; j < stage; ++j) acc += kA[stage][j] * k[j][i];
        ytmp[i] = y[i] + step * acc;
      }
      eval_rhs(b + kC[stage] * step, ytmp, k[stage]);
    }
    for (std::size_t i = 0; i < dim; ++i) {
      double acc5 = 0.0, acc4 = 0.0;
      for (int j = 0; j < 7; ++j) {
        acc5 += kB5[j] * k[j][i];
        acc4 += kB4[j] * k[j][i];
      }
      ynew[i] = y[i] + step * acc5;
      ytmp[i] = step * (acc5 - acc4);  // local error
    }

    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double scale =
          sc.abs_tol +
          sc.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = ytmp[i] / scale;
      err += r * r;
    }
    err = std::sqrt(err / double(dim));

    if (err <= 1.0) {
      b += step;
      y.swap(ynew);
      k[0].swap(k[6]);  // FSAL: stage 7 was evaluated at (b, y) just accepted
      for (int l = 0; l < n; ++l) {
        if (!warned[l] && (y[l] <= 0.0 || y[l] > 1.0 + 1e-12)) {
          state.range_warnings.push_back({l, b, y[l]});
          warned[l] = 1;
        }
      }
    }
    // On rejection k[0] still holds f(b, y) and is reused.
    step *= std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
  }

  state.flow_time = b;
  std::copy(y.begin(), y.begin() + n, state.h.begin());
  std::copy(y.begin() + n, y.end(), state.m.begin());
  return state;
}

double m_closed_form_delta(double delta, double u, double b_time) {
  if (delta == 0.0) return 0.0;
  return u * one_minus_exp(b_time * delta * delta) / delta;
}

double m_closed_form(const ModeGrid& grid, int l, int pp, int qp, int p,
                     double u, double b_time) {
  const int n = grid.size();
  if (l < 0 || l >= n || pp < 0 || pp >= n || qp < 0 || qp >= n || p < 0 ||
      p >= n)
    throw std::invalid_argument("m_closed_form: mode index out of range");
  const auto& e = grid.energies;
  return m_closed_form_delta(e[pp] - e[p] + e[qp] - e[l], u, b_time);
}

double h_closed_form_discrete(const ModeGrid& grid, int l, double u,
                              double b_time) {
  const int n = grid.size();
  if (l < 0 || l >= n)
    throw std::invalid_argument("h_closed_form_discrete: mode out of range");
  if (grid.occupations.size() != grid.momenta.size())
    throw std::invalid_argument(
        "h_closed_form_discrete: grid occupations not filled");
  const auto& e = grid.energies;
  const auto& occ = grid.occupations;
  double acc = 0.0;
  for (int pp = 0; pp < n; ++pp) {
    for (int qp = 0; qp < n; ++qp) {
      for (int pc = 0; pc < n; ++pc) {
        if (l + pc != pp + qp) continue;  // momentum bookkeeping
        const double q = occ[pp] * occ[qp] * (1.0 - occ[pc]) +
                         (1.0 - occ[pp]) * (1.0 - occ[qp]) * occ[pc];
        if (q == 0.0) continue;
        acc += q * h_kernel(e[pp] - e[pc] + e[qp] - e[l], b_time);
      }
    }
  }
  return 1.0 - u * u * acc;
}

double h_closed_form(double eps_l, double u, double mu, double b_time,
                     const QuadratureConfig& cfg) {
  if (!(b_time >= 0.0))
    throw std::invalid_argument("h_closed_form: B must be >= 0");
  if (!(std::abs(mu) < 2.0))
    throw std::invalid_argument(
        "h_closed_form: rho(mu) requires mu inside the band");
  if (u == 0.0 || b_time == 0.0) return 1.0;

  const double rho = density_of_states(mu);
  auto integrand = [eps_l, mu, b_time](double en) {
    const double w = en - mu;
    return w * w * pole_kernel(en - eps_l, b_time);
  };

  double integral;
  try {
    if (eps_l > -2.0 && eps_l < 2.0) {
      integral = integrate_1d(integrand, -2.0, eps_l, cfg).value +
                 integrate_1d(integrand, eps_l, 2.0, cfg).value;
    } else {
      integral = integrate_1d(integrand, -2.0, 2.0, cfg).value;
    }
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string("h_closed_form: ") + e.what(),
                         e.partial_value(), e.error_estimate());
  }
  return 1.0 - u * u * rho * rho * rho * integral;
}

double quasiparticle_residue(double h_at_fermi) {
  if (!(h_at_fermi > 0.0 && h_at_fermi <= 1.0))
    throw std::domain_error(
        "quasiparticle_residue: h outside (0, 1] signals perturbative "
        "breakdown");
  return h_at_fermi * h_at_fermi;
}

ResidueCurve residue_curve(double u, double mu,
                           const std::vector<double>& b_values,
                           const QuadratureConfig& cfg) {
  std::vector<double> bs = b_values;
  std::sort(bs.begin(), bs.end());
  ResidueCurve curve;
  curve.points.reserve(bs.size());
  for (double b : bs) {
    const double h = h_closed_form(mu, u, mu, b, cfg);
    curve.points.push_back({b, h, quasiparticle_residue(h)});
  }
  return curve;
}

}  // namespace flowent
