#pragma once

// Adaptive 1D quadrature (Gauss-Kronrod 7/15) on finite and semi-infinite
// domains, a double-precision complementary error function, and an
// exclusion-window integrator for probing pole divergences.

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flowent {

enum class SemiInfiniteMap {
  exp_decay,  // x = a - ln(1-t): for integrands with (at least) exponential decay
  rational    // x = a + t/(1-t): handles polynomial tails like 1/x^2 as well
};

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
  SemiInfiniteMap semi_infinite_map = SemiInfiniteMap::rational;

  void validate() const;  // throws std::invalid_argument
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Subdivision budget exhausted (or interval width hit the roundoff floor)
// before the tolerance was met. Carries the partial value reached.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double partial_value,
                 double error_estimate)
      : std::runtime_error(what),
        partial_value_(partial_value),
        error_estimate_(error_estimate) {}
  double partial_value() const { return partial_value_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double partial_value_;
  double error_estimate_;
};

using Integrand = std::function<double(double)>;

// Adaptive integral of f over [a, b].
// Worst-interval-first bisection; deterministic for a fixed build and config.
IntegralResult integrate_1d(const Integrand& f, double a, double b,
                            const QuadratureConfig& cfg = {});

// Integral of f over [a, +inf), mapped to [0,1] per cfg.semi_infinite_map.
IntegralResult integrate_semi_infinite(const Integrand& f, double a,
                                       const QuadratureConfig& cfg = {});

// Complementary error function, |relative error| <= 1e-12 for |x| <= 10.
// Power series for |x| < 1, Laplace continued fraction (modified Lentz)
// for x >= 1, reflection erfc(-x) = 2 - erfc(x) for negative arguments.
double erfc(double x);

// Integrates f over [a, b] \ (pole - delta, pole + delta) for each window
// half-width delta, returning (delta, value) pairs. The caller fits the
// growth law in delta; a second-order pole gives log-log slope -1.
// windows must be strictly decreasing and positive; a < pole < b.
std::vector<std::pair<double, double>> probe_pole_divergence(
    const Integrand& f, double a, double b, double pole,
    const std::vector<double>& windows, const QuadratureConfig& cfg = {});

}  // namespace flowent
