#pragma once

// The one-dimensional heteroclinic w(t) = tanh(t/sqrt 2) of w'' + w - w^3 = 0
// and the interaction constants derived from it. All evaluations are closed
// form.

namespace mlac {

struct ProfileConstants {
  double c_star;  ///< total energy of w
  double b1;      ///< integral of w'^2
  double b2;      ///< integral of 6(1 - w^2) e^{sqrt2 t} w'
  double beta;    ///< b2 / b1
};

double heteroclinic(double t);
double heteroclinic_derivative(double t);
double heteroclinic_second_derivative(double t);

/// |w(t) - 1 + 2 e^{-sqrt2 t}|, the defect of the two-term tail expansion.
/// Requires t > 1.
double tail_defect(double t);

/// Composite 6th-order (Boole) quadrature of the profile integrals over
/// [-half_width, half_width]. Throws NumericalError if the two equivalent
/// forms of b2 disagree by more than `tolerance`.
ProfileConstants compute_constants(double half_width = 40.0, double tolerance = 1e-10);

/// Constants at the default truncation, computed once.
const ProfileConstants& default_constants();

}  // namespace mlac
