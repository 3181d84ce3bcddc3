#include "mlac/ansatz.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mlac/errors.hpp"
#include "mlac/profile.hpp"

namespace mlac {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kD2[7] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
constexpr double kD1[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};

int reflect(int j, int n) {
  if (j < 0) return -j;
  if (j > n - 1) return 2 * (n - 1) - j;
  return j;
}

double F(double u) { return u - u * u * u; }

// Dense transverse matrices with the Neumann reflection folded in.
Eigen::MatrixXd transverse_matrix(int n, double dt, const double (&c)[7], int power) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const double scale = std::pow(dt, -power);
  for (int j = 0; j < n; ++j)
    for (int k = -3; k <= 3; ++k) d(j, reflect(j + k, n)) += c[k + 3] * scale;
  return d;
}

// Trapezoid weights on the t-grid.
Eigen::VectorXd trapezoid(int n, double dt) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, dt);
  w[0] = w[n - 1] = 0.5 * dt;
  return w;
}

double cell_measure(double dy, double dt) { return dt * std::min(dy, 1.0); }

}  // namespace

StripGrid::StripGrid(PeriodicGrid y, double eps, double t_extent_, int n_t_)
    : y_grid(y), epsilon(eps), t_extent(t_extent_), n_t(n_t_) {
  if (!(eps > 0.0 && eps < kEpsilonMax)) throw DomainError("StripGrid: epsilon must lie in (0, 0.2)");
  if (!(t_extent_ > 0.0)) throw DomainError("StripGrid: t_extent must be positive");
  if (n_t_ < 7 || n_t_ % 2 == 0) throw DomainError("StripGrid: n_t must be odd and at least 7");
}

Eigen::VectorXd StripGrid::t_values() const {
  Eigen::VectorXd t(n_t);
  for (int j = 0; j < n_t; ++j) t[j] = this->t(j);
  return t;
}

double auto_t_extent(int m, const Scales& scales) { return (0.5 * m + 1.0) * scales.rho + 6.0; }

StripField::StripField(StripGrid g, Eigen::MatrixXd v) : grid(std::move(g)), values(std::move(v)) {
  if (values.rows() != grid.n_y() || values.cols() != grid.n_t)
    throw GridMismatchError("StripField: value matrix does not match the grid");
  if (!values.allFinite()) throw NumericalError("StripField: non-finite samples");
}

StripField StripField::zeros(const StripGrid& g) {
  return StripField(g, Eigen::MatrixXd::Zero(g.n_y(), g.n_t));
}

StripField assemble_u0(const Eigen::MatrixXd& f, const StripGrid& grid, const Scales& scales) {
  const int m = static_cast<int>(f.rows());
  if (m < 1) throw DomainError("assemble_u0: need at least one layer");
  if (f.cols() != grid.n_y()) throw GridMismatchError("assemble_u0: f does not match the y-grid");
  if (grid.t_extent < (0.5 * m + 1.0) * scales.rho)
    throw DomainError("assemble_u0: strip narrower than (m/2 + 1) rho");
  const double offset = ((m % 2 == 1 ? 1.0 : -1.0) - 1.0) / 2.0;
  Eigen::MatrixXd u = Eigen::MatrixXd::Constant(grid.n_y(), grid.n_t, offset);
  for (int i = 0; i < grid.n_y(); ++i)
    for (int j = 0; j < grid.n_t; ++j)
      for (int k = 0; k < m; ++k)
        u(i, j) += (k % 2 == 0 ? 1.0 : -1.0) * heteroclinic(grid.t(j) - f(k, i));
  return StripField(grid, std::move(u));
}

StripStencil strip_stencil(const StripGrid& grid, const PeriodicField& curvature) {
  require_same_grid(grid.y_grid, curvature.grid, "strip_stencil");
  const double e2 = grid.epsilon * grid.epsilon;
  return StripStencil{e2 * periodic_d2_matrix(grid.y_grid), grid.t_values(),
                      -e2 * curvature.values, grid.dt()};
}

StripField strip_operator(const StripField& u, const PeriodicField& curvature) {
  Eigen::MatrixXd out;
  kernels::strip_apply(strip_stencil(u.grid, curvature), u.values, out);
  return StripField(u.grid, std::move(out));
}

Eigen::SparseMatrix<double> strip_operator_matrix(const StripGrid& grid,
                                                  const PeriodicField& curvature) {
  const StripStencil s = strip_stencil(grid, curvature);
  const int ny = grid.n_y(), nt = grid.n_t;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ny) * nt * (ny + 14));
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nt; ++j) {
      const int row = i * nt + j;
      for (int k = -3; k <= 3; ++k) {
        const int col = i * nt + reflect(j + k, nt);
        trip.emplace_back(row, col, kD2[k + 3] / (s.dt * s.dt));
        if (kD1[k + 3] != 0.0) trip.emplace_back(row, col, s.drift[i] * s.t[j] * kD1[k + 3] / s.dt);
      }
      for (int l = 0; l < ny; ++l) trip.emplace_back(row, l * nt + j, s.d2y(i, l));
    }
  Eigen::SparseMatrix<double> a(ny * nt, ny * nt);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

StripField residual(const StripField& u, const PeriodicField& curvature) {
  StripField r = strip_operator(u, curvature);
  r.values += u.values.unaryExpr([](double v) { return F(v); });
  return r;
}

LayerModel::LayerModel(Eigen::MatrixXd f, PeriodicField curvature, double epsilon)
    : f_(std::move(f)), k_(std::move(curvature)), eps_(epsilon) {
  if (f_.cols() != k_.grid.n) throw GridMismatchError("LayerModel: f does not match the curvature grid");
  fp_ = f_ * periodic_d1_matrix(k_.grid).transpose();
  fpp_ = f_ * periodic_d2_matrix(k_.grid).transpose();
}

double LayerModel::value(int i, double z) const {
  const int m = this->m();
  double u = ((m % 2 == 1 ? 1.0 : -1.0) - 1.0) / 2.0;
  for (int k = 0; k < m; ++k) u += (k % 2 == 0 ? 1.0 : -1.0) * heteroclinic(z - f_(k, i));
  return u;
}

double LayerModel::residual(int i, double z) const {
  const double e2 = eps_ * eps_;
  double lin = 0.0;
  for (int k = 0; k < m(); ++k) {
    const double xi = z - f_(k, i);
    const double s = (k % 2 == 0 ? 1.0 : -1.0);
    lin += s * (heteroclinic_second_derivative(xi) * (1.0 + e2 * fp_(k, i) * fp_(k, i)) -
                e2 * (fpp_(k, i) + z * k_.values[i]) * heteroclinic_derivative(xi));
  }
  return lin + F(value(i, z));
}

ExpansionTerms expansion_prediction(int ell, const HStack& h, const PeriodicField& curvature,
                                    const Scales& scales, const Eigen::VectorXd& t_window,
                                    double M) {
  const int m = h.m();
  if (ell < 1 || ell > m) throw DomainError("expansion_prediction: layer index out of range");
  require_same_grid(h.grid, curvature.grid, "expansion_prediction");
  const double half = 0.5 * scales.rho + M;
  for (double t : t_window)
    if (std::abs(t) > half * (1.0 + 1e-12))
      throw DomainError("expansion_prediction: t outside the layer window rho/2 + M");

  const int n = h.grid.n, nw = static_cast<int>(t_window.size());
  const int l = ell - 1;
  const Eigen::MatrixXd f = f_from_h(h, scales);
  const Eigen::VectorXd hp = periodic_d1_matrix(h.grid) * h.h.row(l).transpose();
  const Eigen::VectorXd hpp = periodic_d2_matrix(h.grid) * h.h.row(l).transpose();
  const double e2 = scales.epsilon * scales.epsilon;
  const double sign = (l % 2 == 0) ? 1.0 : -1.0;

  ExpansionTerms out{Eigen::MatrixXd(n, nw), Eigen::MatrixXd(n, nw), Eigen::MatrixXd(n, nw),
                     Eigen::MatrixXd(n, nw)};
  for (int i = 0; i < n; ++i) {
    // Neighbour weights; a missing neighbour drops its exponential.
    const double lower = l > 0 ? std::exp(-kSqrt2 * (h.h(l, i) - h.h(l - 1, i))) : 0.0;
    const double upper = l < m - 1 ? std::exp(-kSqrt2 * (h.h(l + 1, i) - h.h(l, i))) : 0.0;
    for (int j = 0; j < nw; ++j) {
      const double t = t_window[j];
      const double w = heteroclinic(t), wp = heteroclinic_derivative(t);
      const double wpp = heteroclinic_second_derivative(t);
      out.interaction(i, j) = sign * 6.0 * (1.0 - w * w) * e2 * scales.rho *
                              (lower * std::exp(-kSqrt2 * t) - upper * std::exp(kSqrt2 * t));
      out.curvature(i, j) = -sign * e2 * (t + f(l, i)) * curvature.values[i] * wp;
      out.jacobi(i, j) = -sign * e2 * hpp[i] * wp;
      out.gradient(i, j) = sign * e2 * hp[i] * hp[i] * wpp;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> unit_ball(double dy, double dt, int n_y) {
  std::vector<std::pair<int, int>> out;
  const int ky = std::min(static_cast<int>(std::floor(1.0 / dy)), n_y / 2);
  const int kt = static_cast<int>(std::floor(1.0 / dt));
  for (int di = -ky; di <= ky; ++di)
    for (int dj = -kt; dj <= kt; ++dj)
      if ((di * dy) * (di * dy) + (dj * dt) * (dj * dt) <= 1.0 + 1e-12) out.emplace_back(di, dj);
  return out;
}

double weighted_norm(const Eigen::MatrixXd& values, const Eigen::VectorXd& t, double dy, double p,
                     double sigma_decay) {
  if (!(p >= 1.0)) throw DomainError("weighted_norm: p must be >= 1 or infinity");
  if (!(sigma_decay > 0.0 && sigma_decay < kSqrt2))
    throw DomainError("weighted_norm: decay rate must lie in (0, sqrt2)");
  const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
  const double pp = std::isinf(p) ? 0.0 : p;
  return kernels::weighted_norm(values, t, sigma_decay, pp,
                                unit_ball(dy, dt, static_cast<int>(values.rows())),
                                cell_measure(dy, dt));
}

double weighted_norm(const StripField& field, double p, double sigma_decay) {
  return weighted_norm(field.values, field.grid.t_values(), field.grid.stretched_dy(), p,
                       sigma_decay);
}

ResidualReport residual_report(const HStack& h, const PeriodicField& curvature,
                               const Scales& scales, double p, double sigma_decay, double dt,
                               double M) {
  const int m = h.m();
  const LayerModel model(f_from_h(h, scales), curvature, scales.epsilon);
  const double half = 0.5 * scales.rho + M;
  const int nw = 2 * static_cast<int>(std::ceil(half / dt)) + 1;
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(nw, -half, half);
  const double dy = h.grid.spacing() / scales.epsilon;

  ResidualReport r{scales.epsilon, p, sigma_decay, 0, 0, 0, 0, 0, 0, {}, {}};
  for (int ell = 1; ell <= m; ++ell) {
    Eigen::MatrixXd s(h.grid.n, nw);
    for (int i = 0; i < h.grid.n; ++i)
      for (int j = 0; j < nw; ++j) s(i, j) = model.residual(i, t[j] + model.f()(ell - 1, i));
    const ExpansionTerms e = expansion_prediction(ell, h, curvature, scales, t, M);
    auto norm = [&](const Eigen::MatrixXd& g) { return weighted_norm(g, t, dy, p, sigma_decay); };
    const double tot = norm(s), rem = norm(s - e.total());
    r.per_layer_total.push_back(tot);
    r.per_layer_remainder.push_back(rem);
    r.total = std::max(r.total, tot);
    r.remainder = std::max(r.remainder, rem);
    r.interaction = std::max(r.interaction, norm(e.interaction));
    r.curvature = std::max(r.curvature, norm(e.curvature));
    r.jacobi = std::max(r.jacobi, norm(e.jacobi));
    r.gradient = std::max(r.gradient, norm(e.gradient));
  }
  return r;
}

ProjectedSolution solve_projected(const StripField& g) {
  const StripGrid& grid = g.grid;
  const int ny = grid.n_y(), nt = grid.n_t;
  const double dt = grid.dt();
  const Eigen::VectorXd t = grid.t_values();
  Eigen::VectorXd wp(nt), pot(nt);
  for (int j = 0; j < nt; ++j) {
    const double w = heteroclinic(t[j]);
    wp[j] = heteroclinic_derivative(t[j]);
    pot[j] = 1.0 - 3.0 * w * w;
  }
  const Eigen::VectorXd q = trapezoid(nt, dt).cwiseProduct(wp);

  Eigen::MatrixXd d2y = grid.epsilon * grid.epsilon * periodic_d2_matrix(grid.y_grid);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> modes(0.5 * (d2y + d2y.transpose()));
  const Eigen::MatrixXd& v = modes.eigenvectors();
  const Eigen::MatrixXd ghat = v.transpose() * g.values;

  Eigen::MatrixXd base = Eigen::MatrixXd::Zero(nt + 1, nt + 1);
  base.topLeftCorner(nt, nt) = transverse_matrix(nt, dt, kD2, 2);
  base.topLeftCorner(nt, nt).diagonal() += pot;
  base.block(0, nt, nt, 1) = -wp;
  base.block(nt, 0, 1, nt) = q.transpose();

  Eigen::MatrixXd phihat(ny, nt);
  Eigen::VectorXd chat(ny);
  for (int k = 0; k < ny; ++k) {
    Eigen::MatrixXd a = base;
    a.topLeftCorner(nt, nt).diagonal().array() += modes.eigenvalues()[k];
    Eigen::VectorXd rhs(nt + 1);
    rhs.head(nt) = ghat.row(k).transpose();
    rhs[nt] = 0.0;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite() || (a * x - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm()))
      throw NumericalError("solve_projected: bordered system is singular");
    phihat.row(k) = x.head(nt).transpose();
    chat[k] = x[nt];
  }
  ProjectedSolution out{StripField(grid, v * phihat), PeriodicField(grid.y_grid, v * chat), 0.0};
  out.orthogonality = (out.phi.values * q).cwiseAbs().maxCoeff();
  return out;
}

std::vector<std::vector<double>> zero_level_sets(const StripField& u) {
  std::vector<std::vector<double>> out(u.grid.n_y());
  const double dt = u.grid.dt();
  for (int i = 0; i < u.grid.n_y(); ++i)
    for (int j = 0; j + 1 < u.grid.n_t; ++j) {
      const double a = u.values(i, j), b = u.values(i, j + 1);
      if (a == 0.0)
        out[i].push_back(u.grid.t(j));
      else if (a * b < 0.0)
        out[i].push_back(u.grid.t(j) + dt * a / (a - b));
    }
  return out;
}

double strip_energy(const StripField& u) {
  const StripGrid& g = u.grid;
  const Eigen::MatrixXd ut = u.values * transverse_matrix(g.n_t, g.dt(), kD1, 1).transpose();
  const Eigen::MatrixXd uy = g.epsilon * periodic_d1_matrix(g.y_grid) * u.values;
  const Eigen::MatrixXd pot = (1.0 - u.values.array().square()).square().matrix();
  const Eigen::MatrixXd density =
      0.5 * (ut.array().square() + uy.array().square()).matrix() + 0.25 * pot;
  return g.stretched_dy() * (density * trapezoid(g.n_t, g.dt())).sum();
}

NewtonResult newton_allen_cahn(const StripField& u_init, const PeriodicField& curvature, int m,
                               const NewtonOptions& options) {
  const StripGrid& g = u_init.grid;
  const int ny = g.n_y(), nt = g.n_t, n = ny * nt;
  const Eigen::SparseMatrix<double> a = strip_operator_matrix(g, curvature);

  // Row-major flattening matches strip_operator_matrix.
  auto flat = [&](const Eigen::MatrixXd& x) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < ny; ++i) v.segment(i * nt, nt) = x.row(i).transpose();
    return v;
  };
  auto unflat = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd x(ny, nt);
    for (int i = 0; i < ny; ++i) x.row(i) = v.segment(i * nt, nt).transpose();
    return x;
  };
  auto res = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return a * x + (x.array() - x.array().cube()).matrix();
  };

  Eigen::VectorXd x = flat(u_init.values);
  Eigen::VectorXd r = res(x);
  NewtonResult out{u_init, 0, r.cwiseAbs().maxCoeff(), {}, {}, {}, -1};
  out.residual_history.push_back(out.residual);
  out.energy_history.push_back(strip_energy(u_init));

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::SparseMatrix<double> jac = a;
  jac.makeCompressed();
  lu.analyzePattern(jac);
  int it = 0;
  for (; it < options.max_iterations && out.residual > options.tolerance; ++it) {
    jac = a;
    for (int k = 0; k < n; ++k) jac.coeffRef(k, k) += 1.0 - 3.0 * x[k] * x[k];
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw NumericalError("newton_allen_cahn: Jacobian factorization failed");
    const Eigen::VectorXd step = lu.solve(-r);
    const double merit = r.squaredNorm();
    double alpha = 1.0;
    Eigen::VectorXd trial, trial_r;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      trial = x + alpha * step;
      trial_r = res(trial);
      if (trial_r.allFinite() && trial_r.squaredNorm() <= (1.0 - 2e-4 * alpha) * merit) break;
    }
    x = trial;
    r = trial_r;
    out.residual = r.cwiseAbs().maxCoeff();
    out.residual_history.push_back(out.residual);
    out.energy_history.push_back(strip_energy(StripField(g, unflat(x))));
  }
  out.iterations = it;
  out.u = StripField(g, unflat(x));
  if (out.residual > options.tolerance)
    throw ConvergenceError("newton_allen_cahn: no convergence", it, out.residual);

  const auto sets = zero_level_sets(out.u);
  int count = static_cast<int>(sets.front().size());
  for (const auto& s : sets)
    if (static_cast<int>(s.size()) != count) count = -1;
  out.level_set_count = count;
  if (count > 0) {
    out.level_sets.resize(ny, count);
    for (int i = 0; i < ny; ++i)
      for (int k = 0; k < count; ++k) out.level_sets(i, k) = sets[i][k];
  }
  if (options.require_layers && count != m)
    throw NumericalError("newton_allen_cahn: zero level set count differs from m");
  return out;
}

}  // namespace mlac
