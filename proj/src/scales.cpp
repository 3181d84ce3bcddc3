#include "mlac/scales.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mlac/errors.hpp"

namespace mlac {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void check_epsilon(double epsilon, const char* who) {
  if (!(epsilon > 0.0 && epsilon < kEpsilonMax))
    throw DomainError(std::string(who) + ": epsilon must lie in (0, 0.2), got " +
                      std::to_string(epsilon));
}

}  // namespace

double solve_rho(double epsilon) {
  check_epsilon(epsilon, "solve_rho");
  // g(rho) = sqrt2 rho + log(rho) + 2 log(eps) is increasing and concave; its
  // root is the root of the defining relation.
  const double log_eps = std::log(epsilon);
  auto g = [&](double r) { return kSqrt2 * r + std::log(r) + 2.0 * log_eps; };
  double lo = 1.0, hi = 10.0 * kSqrt2 * std::log(1.0 / epsilon);
  if (g(lo) > 0.0 || g(hi) < 0.0) throw NumericalError("solve_rho: root not bracketed");

  double rho = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double value = g(rho);
    if (value > 0.0) hi = rho; else lo = rho;
    double next = rho - value / (kSqrt2 + 1.0 / rho);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - rho) <= 1e-15 * rho) return next;
    rho = next;
  }
  throw ConvergenceError("solve_rho: Newton did not converge", 100, std::abs(g(rho)));
}

double rho_expansion(double epsilon) {
  check_epsilon(epsilon, "rho_expansion");
  const double L = std::log(1.0 / epsilon);
  return kSqrt2 * L - std::log(kSqrt2 * L) / kSqrt2;
}

double rho_relative_residual(double epsilon, double rho) {
  const double rhs = epsilon * epsilon * rho;
  return std::abs(std::exp(-kSqrt2 * rho) - rhs) / rhs;
}

Scales scales_of(double epsilon, const ProfileConstants& constants) {
  const double rho = solve_rho(epsilon);
  return Scales{epsilon, rho, constants.b1 / (constants.b2 * rho), constants.beta};
}

double epsilon_of_sigma(double sigma, const ProfileConstants& constants) {
  if (!(sigma > 0.0)) throw DomainError("epsilon_of_sigma: sigma must be positive");
  const double rho = constants.b1 / (constants.b2 * sigma);
  // eps = sqrt(e^{-sqrt2 rho} / rho), in logs to survive tiny sigma.
  const double epsilon = std::exp(0.5 * (-kSqrt2 * rho - std::log(rho)));
  check_epsilon(epsilon, "epsilon_of_sigma");
  return epsilon;
}

}  // namespace mlac
