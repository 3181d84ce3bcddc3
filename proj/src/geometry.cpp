#include "mlac/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mlac/errors.hpp"

namespace mlac {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

ClosedCurve::ClosedCurve(double length, CurvatureSpec curvature)
    : length_(length), spec_(std::move(curvature)) {
  if (!(length > 0.0)) throw DomainError("ClosedCurve: length must be positive");

  if (const auto* c = std::get_if<ConstantCurvature>(&spec_)) {
    mean_ = c->value;
  } else if (const auto* f = std::get_if<FourierCurvature>(&spec_)) {
    mean_ = f->mean;
    cos_ = f->cos_coefficients;
    sin_ = f->sin_coefficients;
  } else {
    const auto& values = std::get<SampledCurvature>(spec_).values;
    const int n = static_cast<int>(values.size());
    if (n < 2) throw DomainError("ClosedCurve: need at least two curvature samples");
    // Real DFT; the Nyquist mode (even n) enters with half weight as a cosine.
    const int kmax = n / 2;
    cos_.assign(kmax, 0.0);
    sin_.assign(kmax, 0.0);
    for (int i = 0; i < n; ++i) mean_ += values[i] / n;
    for (int k = 1; k <= kmax; ++k) {
      double a = 0.0, b = 0.0;
      for (int i = 0; i < n; ++i) {
        const double phase = 2.0 * kPi * k * i / n;
        a += values[i] * std::cos(phase);
        b += values[i] * std::sin(phase);
      }
      const bool nyquist = (n % 2 == 0 && k == kmax);
      cos_[k - 1] = (nyquist ? 1.0 : 2.0) * a / n;
      sin_[k - 1] = nyquist ? 0.0 : 2.0 * b / n;
    }
  }

  const int check = 4096;
  for (int i = 0; i < check; ++i) {
    const double y = length_ * i / check;
    if (!(evaluate(y).k > 0.0))
      throw PositivityError("curvature must be positive; K(" + std::to_string(y) +
                                ") = " + std::to_string(evaluate(y).k),
                            y);
  }
}

bool ClosedCurve::constant_curvature() const {
  for (double c : cos_) if (c != 0.0) return false;
  for (double s : sin_) if (s != 0.0) return false;
  return true;
}

CurvatureValue ClosedCurve::evaluate(double y) const {
  CurvatureValue out{mean_, 0.0, 0.0};
  const double omega = 2.0 * kPi / length_;
  const std::size_t kmax = std::max(cos_.size(), sin_.size());
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double a = k <= cos_.size() ? cos_[k - 1] : 0.0;
    const double b = k <= sin_.size() ? sin_[k - 1] : 0.0;
    const double w = omega * static_cast<double>(k);
    const double c = std::cos(w * y), s = std::sin(w * y);
    out.k += a * c + b * s;
    out.dk += w * (-a * s + b * c);
    out.d2k += -w * w * (a * c + b * s);
  }
  return out;
}

PeriodicGrid::PeriodicGrid(int n_points, double len) : n(n_points), length(len) {
  if (n < 16 || n % 2 != 0) throw DomainError("PeriodicGrid: n must be even and >= 16");
  if (!(length > 0.0)) throw DomainError("PeriodicGrid: length must be positive");
}

PeriodicField::PeriodicField(PeriodicGrid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.n) throw GridMismatchError("PeriodicField: sample count differs from grid");
  if (!values.allFinite()) throw NumericalError("PeriodicField: non-finite sample");
}

PeriodicField PeriodicField::constant(PeriodicGrid g, double c) {
  return PeriodicField(g, Eigen::VectorXd::Constant(g.n, c));
}

Eigen::MatrixXd periodic_d1_matrix(const PeriodicGrid& grid) {
  const int n = grid.n;
  const double h = 2.0 * kPi / n;
  const double scale = 2.0 * kPi / grid.length;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = scale * 0.5 * sign / std::tan(0.5 * k * h);
    }
  }
  return d;
}

Eigen::MatrixXd periodic_d2_matrix(const PeriodicGrid& grid) {
  const int n = grid.n;
  const double h = 2.0 * kPi / n;
  const double scale = std::pow(2.0 * kPi / grid.length, 2);
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d(i, j) = scale * (-kPi * kPi / (3.0 * h * h) - 1.0 / 6.0);
      } else {
        const int k = i - j;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double s = std::sin(0.5 * k * h);
        d(i, j) = scale * (-0.5 * sign / (s * s));
      }
    }
  }
  return d;
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* who) {
  if (!(a == b)) throw GridMismatchError(std::string(who) + ": fields live on different grids");
}

PeriodicField sample_curvature(const ClosedCurve& curve, const PeriodicGrid& grid) {
  if (std::abs(grid.length - curve.length()) > 1e-12 * curve.length())
    throw GridMismatchError("sample_curvature: grid length differs from curve length");
  PeriodicField k = PeriodicField::sample(grid, [&](double y) { return curve(y); });
  for (int i = 0; i < grid.n; ++i)
    if (!(k.values[i] > 0.0))
      throw PositivityError("curvature must be positive at y = " + std::to_string(grid.point(i)),
                            grid.point(i));
  return k;
}

PeriodicField first_derivative(const PeriodicField& field) {
  return PeriodicField(field.grid, periodic_d1_matrix(field.grid) * field.values);
}

PeriodicField second_derivative(const PeriodicField& field) {
  return PeriodicField(field.grid, periodic_d2_matrix(field.grid) * field.values);
}

PeriodicField jacobi_apply(const PeriodicField& field, const PeriodicField& curvature) {
  require_same_grid(field.grid, curvature.grid, "jacobi_apply");
  Eigen::VectorXd out = periodic_d2_matrix(field.grid) * field.values;
  out += curvature.values.cwiseProduct(field.values);
  return PeriodicField(field.grid, std::move(out));
}

double ell0(const ClosedCurve& curve, const PeriodicGrid& grid) {
  const PeriodicField k = sample_curvature(curve, grid);
  // The periodic trapezoid rule is spectrally accurate for smooth integrands.
  return k.values.cwiseSqrt().sum() * grid.spacing();
}

JacobiConditioning jacobi_conditioning(const PeriodicField& curvature) {
  Eigen::MatrixXd j = periodic_d2_matrix(curvature.grid);
  j.diagonal() += curvature.values;
  // Symmetric matrix: singular values are the absolute eigenvalues.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd s = eig.eigenvalues().cwiseAbs();
  const double smallest = s.minCoeff();
  const double largest = s.maxCoeff();
  return JacobiConditioning{smallest, largest, smallest < 1e-8 * largest};
}

double inner_product(const PeriodicField& f, const PeriodicField& g) {
  require_same_grid(f.grid, g.grid, "inner_product");
  return f.values.dot(g.values) * f.grid.spacing();
}

}  // namespace mlac
