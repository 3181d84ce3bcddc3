#pragma once

// Closed geodesic of a surface: arclength parameterization, curvature
// K(y) > 0 along it, and uniform periodic grids with trigonometric
// (spectral) differentiation.

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace mlac {

struct ConstantCurvature {
  double value;
};

/// K(y) = mean + sum_k cos_k cos(2 pi k y / l) + sin_k sin(2 pi k y / l),
/// k = 1, 2, ...
struct FourierCurvature {
  double mean;
  std::vector<double> cos_coefficients;
  std::vector<double> sin_coefficients;
};

/// Raw samples at y_i = i l / n, interpolated trigonometrically.
struct SampledCurvature {
  std::vector<double> values;
};

using CurvatureSpec = std::variant<ConstantCurvature, FourierCurvature, SampledCurvature>;

struct CurvatureValue {
  double k, dk, d2k;
};

class ClosedCurve {
 public:
  /// Throws PositivityError if K <= 0 anywhere on a fine check grid.
  ClosedCurve(double length, CurvatureSpec curvature);

  double length() const { return length_; }
  const CurvatureSpec& curvature() const { return spec_; }
  bool constant_curvature() const;

  /// K and its first two arclength derivatives at y.
  CurvatureValue evaluate(double y) const;
  double operator()(double y) const { return evaluate(y).k; }

 private:
  double length_;
  CurvatureSpec spec_;
  // Trigonometric form shared by all curvature kinds.
  double mean_ = 0.0;
  std::vector<double> cos_, sin_;
};

struct PeriodicGrid {
  int n;
  double length;

  /// Requires even n >= 16 and positive length.
  PeriodicGrid(int n, double length);
  double spacing() const { return length / n; }
  double point(int i) const { return i * length / n; }
  bool operator==(const PeriodicGrid&) const = default;
};

struct PeriodicField {
  PeriodicGrid grid;
  Eigen::VectorXd values;

  PeriodicField(PeriodicGrid g, Eigen::VectorXd v);
  static PeriodicField constant(PeriodicGrid g, double c);
  template <class F>
  static PeriodicField sample(PeriodicGrid g, F&& f) {
    Eigen::VectorXd v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = f(g.point(i));
    return PeriodicField(g, std::move(v));
  }
};

/// Spectral first/second derivative matrices on a uniform grid (even n);
/// exact on trigonometric polynomials of degree < n/2.
Eigen::MatrixXd periodic_d1_matrix(const PeriodicGrid& grid);
Eigen::MatrixXd periodic_d2_matrix(const PeriodicGrid& grid);

PeriodicField sample_curvature(const ClosedCurve& curve, const PeriodicGrid& grid);
PeriodicField first_derivative(const PeriodicField& field);
PeriodicField second_derivative(const PeriodicField& field);

/// f'' + K f.
PeriodicField jacobi_apply(const PeriodicField& field, const PeriodicField& curvature);

/// Length of the curve in the metric sqrt(K) dy.
double ell0(const ClosedCurve& curve, const PeriodicGrid& grid);

struct JacobiConditioning {
  double smallest_singular_value;
  double largest_singular_value;
  bool degenerate;  ///< smallest < 1e-8 * largest
};

/// Singular values of the discretized d^2/dy^2 + K.
JacobiConditioning jacobi_conditioning(const PeriodicField& curvature);

/// Discrete inner product sum f_i g_i h.
double inner_product(const PeriodicField& f, const PeriodicField& g);

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* who);

}  // namespace mlac
