#pragma once

#include "mlac/profile.hpp"

namespace mlac {

/// Small parameters of the multi-layer reduction at one value of epsilon.
struct Scales {
  double epsilon;
  double rho;    ///< root of e^{-sqrt2 rho} = epsilon^2 rho
  double sigma;  ///< Toda coupling b1 / (b2 rho)
  double beta;   ///< b2 / b1
};

/// Upper end of the admissible epsilon range; beyond it rho < 1.
inline constexpr double kEpsilonMax = 0.2;

/// Safeguarded Newton (bisection fallback) for the unique positive root of
/// e^{-sqrt2 rho} = epsilon^2 rho on 0 < epsilon < 0.2.
double solve_rho(double epsilon);

/// sqrt2 log(1/eps) - (1/sqrt2) log(sqrt2 log(1/eps)).
double rho_expansion(double epsilon);

Scales scales_of(double epsilon, const ProfileConstants& constants = default_constants());

/// Relative defect |e^{-sqrt2 rho} - eps^2 rho| / (eps^2 rho).
double rho_relative_residual(double epsilon, double rho);

/// Inverse map sigma -> epsilon (sigma must correspond to 0 < epsilon < 0.2).
double epsilon_of_sigma(double sigma, const ProfileConstants& constants = default_constants());

}  // namespace mlac
