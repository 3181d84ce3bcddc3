#include "mlac/profile.hpp"

#include <cmath>
#include <numbers>

#include "mlac/errors.hpp"

namespace mlac {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Composite Boole rule; `panels` groups of four intervals.
template <class F>
double boole(F&& f, double a, double b, int panels) {
  const int n = 4 * panels;
  const double h = (b - a) / n;
  double sum = 7.0 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) {
    const double x = a + i * h;
    switch (i % 4) {
      case 0: sum += 14.0 * f(x); break;
      case 2: sum += 12.0 * f(x); break;
      default: sum += 32.0 * f(x); break;
    }
  }
  return sum * 2.0 * h / 45.0;
}

}  // namespace

double heteroclinic(double t) { return std::tanh(t / kSqrt2); }

double heteroclinic_derivative(double t) {
  const double c = std::cosh(t / kSqrt2);
  return 1.0 / (kSqrt2 * c * c);
}

double heteroclinic_second_derivative(double t) {
  // w'' = w^3 - w
  const double w = heteroclinic(t);
  return w * w * w - w;
}

double tail_defect(double t) {
  if (!(t > 1.0)) throw DomainError("tail_defect: requires t > 1");
  // 1 - w = 2/(e^{sqrt2 t} + 1); evaluate the defect without cancellation:
  // 2e^{-x} - 2/(e^x + 1) = 2e^{-x}/(e^x + 1) with x = sqrt2 t.
  const double x = kSqrt2 * t;
  return 2.0 * std::exp(-x) / (std::exp(x) + 1.0);
}

ProfileConstants compute_constants(double half_width, double tolerance) {
  if (!(tolerance > 0.0)) throw DomainError("compute_constants: tolerance must be positive");
  if (!(std::exp(-kSqrt2 * half_width) < tolerance))
    throw DomainError("compute_constants: half_width too small for tolerance");

  // h = 1/400 keeps the Boole error far below 1e-14 for these integrands.
  const int panels = static_cast<int>(std::ceil(2.0 * half_width * 100.0));
  const double a = -half_width, b = half_width;

  const double c_star = boole(
      [](double t) {
        const double wp = heteroclinic_derivative(t);
        const double w = heteroclinic(t);
        return 0.5 * wp * wp + 0.25 * (1 - w * w) * (1 - w * w);
      },
      a, b, panels);
  const double b1 = boole(
      [](double t) {
        const double wp = heteroclinic_derivative(t);
        return wp * wp;
      },
      a, b, panels);
  // 1 - w^2 = sech^2(t/sqrt2); the product with e^{+-sqrt2 t} stays bounded.
  auto interaction = [](double sign) {
    return [sign](double t) {
      const double c = std::cosh(t / kSqrt2);
      const double sech2 = 1.0 / (c * c);
      return 6.0 * sech2 * std::exp(sign * kSqrt2 * t) * sech2 / kSqrt2;
    };
  };
  const double b2_plus = boole(interaction(+1.0), a, b, panels);
  const double b2_minus = boole(interaction(-1.0), a, b, panels);
  if (std::abs(b2_plus - b2_minus) > tolerance * std::max(1.0, std::abs(b2_plus)))
    throw NumericalError("compute_constants: the two interaction integrals disagree");

  return ProfileConstants{c_star, b1, b2_plus, b2_plus / b1};
}

const ProfileConstants& default_constants() {
  static const ProfileConstants constants = compute_constants();
  return constants;
}

}  // namespace mlac
