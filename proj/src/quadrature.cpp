#include "flowent/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace flowent {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK dqk15 constants).
// xgk[1], xgk[3], xgk[5] and the center are the embedded 7-point Gauss nodes.
constexpr double kXgk[8] = {
    0.9914553711208126392068547, 0.9491079123427585245261897,
    0.8648644233597690727897128, 0.7415311855993944398638648,
    0.5860872354676911302941448, 0.4058451513773971669066064,
    0.2077849550078984676006894, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992};
constexpr double kWg[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020};

struct Segment {
  double a, b;
  double value;
  double error;
};

// 15-point Kronrod estimate with the QUADPACK error model.
Segment gk15(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[15];
  const double fc = f(center);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double f1 = f(center - half * kXgk[j]);
    const double f2 = f(center + half * kXgk[j]);
    fv[j] = f1;
    fv[7 + j] = f2;
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv[j] - reskh) + std::abs(fv[7 + j] - reskh));

  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / eps50)
    err = std::max(err, eps50 * resabs);

  return {a, b, resk * half, err};
}

IntegralResult adaptive(const Integrand& f, double a, double b,
                        const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a < b))
    throw std::invalid_argument("integrate_1d: requires a < b");

  std::vector<Segment> segs;
  segs.reserve(64);
  segs.push_back(gk15(f, a, b));

  const double span = b - a;
  const double width_floor =
      16.0 * std::numeric_limits<double>::epsilon() * std::abs(span);

  while (true) {
    double total = 0.0, toterr = 0.0;
    for (const auto& s : segs) {
      total += s.value;
      toterr += s.error;
    }
    const double target = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total));
    if (std::isfinite(total) && std::isfinite(toterr) && toterr <= target)
      return {total, toterr};

    // Worst segment; non-finite estimates (an integrable singularity hit by
    // a node) outrank everything, and ties break toward the smaller left
    // endpoint so the refinement order is deterministic.
    const auto rank = [](double e) {
      return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
    };
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i) {
      const double ei = rank(segs[i].error);
      const double ew = rank(segs[worst].error);
      if (ei > ew || (ei == ew && segs[i].a < segs[worst].a)) worst = i;
    }
    if (static_cast<int>(segs.size()) >= cfg.max_subdivisions ||
        segs[worst].b - segs[worst].a < width_floor) {
      throw NonConvergence(
          "integrate_1d: subdivision budget exhausted (error " +
              std::to_string(toterr) + " > target " + std::to_string(target) +
              ")",
          total, toterr);
    }
    const Segment s = segs[worst];
    const double mid = 0.5 * (s.a + s.b);
    segs[worst] = gk15(f, s.a, mid);
    segs.push_back(gk15(f, mid, s.b));
  }
}

// erfc power series via erf's Maclaurin expansion; for |x| < 1.
double erfc_series(double x) {
  const double x2 = x * x;
  double term = x;  // x^(2n+1) (-1)^n / n!
  double sum = x;
  for (int n = 1; n < 60; ++n) {
    term *= -x2 / n;
    const double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return 1.0 - 2.0 / std::sqrt(std::numbers::pi) * sum;
}

// Laplace continued fraction erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x +
// 1/(x + (3/2)/(x + ...)))), evaluated with modified Lentz; for x >= 1.
double erfc_cf(double x) {
  constexpr double tiny = 1e-300;
  double fval = x;  // b0
  double c = fval;
  double d = 0.0;
  for (int n = 1; n < 300; ++n) {
    const double an = 0.5 * n;
    d = x + an * d;
    if (d == 0.0) d = tiny;
    c = x + an / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    fval *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return std::exp(-x * x) / std::sqrt(std::numbers::pi) / fval;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("QuadratureConfig: tolerances must be > 0");
  if (max_subdivisions < 1)
    throw std::invalid_argument("QuadratureConfig: max_subdivisions >= 1");
}

IntegralResult integrate_1d(const Integrand& f, double a, double b,
                            const QuadratureConfig& cfg) {
  return adaptive(f, a, b, cfg);
}

IntegralResult integrate_semi_infinite(const Integrand& f, double a,
                                       const QuadratureConfig& cfg) {
  if (cfg.semi_infinite_map == SemiInfiniteMap::rational) {
    // x = a + t/(1-t), dx = dt/(1-t)^2, t in [0, 1).
    auto mapped = [&f, a](double t) {
      const double om = 1.0 - t;
      const double x = a + t / om;
      return f(x) / (om * om);
    };
    return adaptive(mapped, 0.0, 1.0, cfg);
  }
  // x = a - ln(1-t), dx = dt/(1-t), t in [0, 1).
  auto mapped = [&f, a](double t) {
    const double om = 1.0 - t;
    const double x = a - std::log(om);
    return f(x) / om;
  };
  return adaptive(mapped, 0.0, 1.0, cfg);
}

double erfc(double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x < 1.0) return erfc_series(x);
  if (x > 27.5) return 0.0;  // e^{-x^2} below double range
  return erfc_cf(x);
}

std::vector<std::pair<double, double>> probe_pole_divergence(
    const Integrand& f, double a, double b, double pole,
    const std::vector<double>& windows, const QuadratureConfig& cfg) {
  if (!(a < pole && pole < b))
    throw std::invalid_argument("probe_pole_divergence: pole must lie in (a, b)");
  if (windows.empty())
    throw std::invalid_argument("probe_pole_divergence: empty window list");
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (!(windows[i] > 0.0) || (i > 0 && !(windows[i] < windows[i - 1])))
      throw std::invalid_argument(
          "probe_pole_divergence: windows must be positive and strictly "
          "decreasing");
  }
  if (!(pole - windows.front() > a && pole + windows.front() < b))
    throw std::invalid_argument(
        "probe_pole_divergence: largest window exceeds the domain");

  std::vector<std::pair<double, double>> scan;
  scan.reserve(windows.size());
  for (double delta : windows) {
    try {
      const IntegralResult left = adaptive(f, a, pole - delta, cfg);
      const IntegralResult right = adaptive(f, pole + delta, b, cfg);
      scan.emplace_back(delta, left.value + right.value);
    } catch (const NonConvergence& e) {
      throw std::runtime_error(
          "probe_pole_divergence: integration failed on window delta=" +
          std::to_string(delta) + ": " + e.what());
    }
  }
  return scan;
}

}  // namespace flowent
