#include "mlac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mlac/errors.hpp"
#include "mlac/kernels.hpp"
#include "mlac/scales.hpp"

namespace mlac {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

int even_at_least(double x, int floor_n) {
  int n = static_cast<int>(std::ceil(x));
  n += n % 2;
  return std::max(n, floor_n);
}

// Negative eigenvalues, ignoring those within tol of zero.
int count_negative(const Eigen::VectorXd& ev, double tol) {
  int c = 0;
  for (double v : ev)
    if (v < -tol) ++c;
  return c;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  return eig.eigenvalues();
}

}  // namespace

double MatrixFieldA::gamma_minus() const {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& a : entries) g = std::min(g, symmetric_eigenvalues(a).minCoeff());
  return g;
}

double MatrixFieldA::gamma_plus() const {
  double g = -std::numeric_limits<double>::infinity();
  for (const auto& a : entries) g = std::max(g, symmetric_eigenvalues(a).maxCoeff());
  return g;
}

MatrixFieldA assemble_A(const Eigen::MatrixXd& vbar, double sigma, const PeriodicField& curvature,
                        const TodaMatrices& matrices) {
  const int dim = matrices.m - 1;
  if (vbar.rows() != dim || vbar.cols() != curvature.grid.n)
    throw GridMismatchError("assemble_A: gap fields do not match the curvature grid or m");
  if (sigma < 0.0) throw DomainError("assemble_A: sigma must be nonnegative");
  MatrixFieldA a{curvature.grid, dim, {}};
  a.entries.reserve(curvature.grid.n);
  for (int i = 0; i < curvature.grid.n; ++i) {
    const Eigen::VectorXd e = (-kSqrt2 * vbar.col(i).array()).exp().matrix();
    Eigen::MatrixXd ai = kSqrt2 * matrices.C_sqrt * e.asDiagonal() * matrices.C_sqrt;
    ai.diagonal().array() += sigma * curvature.values[i];
    a.entries.push_back(0.5 * (ai + ai.transpose()));
  }
  return a;
}

MatrixFieldA A_at_zero(const PeriodicField& curvature, int m, double beta) {
  const TodaMatrices t = build_matrices(m);
  Eigen::MatrixXd q = t.C_sqrt * layer_weights(m).asDiagonal() * t.C_sqrt;
  q = 0.5 * (q + q.transpose());
  MatrixFieldA a{curvature.grid, m - 1, {}};
  for (int i = 0; i < curvature.grid.n; ++i)
    a.entries.push_back(curvature.values[i] / (kSqrt2 * beta) * q);
  return a;
}

Eigen::MatrixXd assemble_L_sigma(const MatrixFieldA& a, double sigma) {
  const int n = a.grid.n;
  const int dim = a.dim;
  const Eigen::MatrixXd d2 = periodic_d2_matrix(a.grid);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(dim * n, dim * n);
  for (int p = 0; p < dim; ++p) {
    l.block(p * n, p * n, n, n) = -sigma * d2;
    for (int q = 0; q < dim; ++q)
      for (int i = 0; i < n; ++i) l(p * n + i, q * n + i) -= a.entries[i](p, q);
  }
  return 0.5 * (l + l.transpose());
}

EigenReport eigs_L_sigma(const MatrixFieldA& a, double sigma) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(assemble_L_sigma(a, sigma));
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return EigenReport{sigma, ev, count_negative(ev, 1e-13 * scale)};
}

AFamily frozen_family(Eigen::MatrixXd vbar, PeriodicField curvature) {
  const TodaMatrices t = build_matrices(static_cast<int>(vbar.rows()) + 1);
  return [vbar = std::move(vbar), curvature = std::move(curvature), t](double sigma) {
    return assemble_A(vbar, sigma, curvature, t);
  };
}

MonotonicityReport monotonicity_check(double sigma1, double sigma2, const AFamily& family,
                                      int count) {
  if (!(sigma1 > 0.0) || sigma2 < sigma1)
    throw DomainError("monotonicity_check: need 0 < sigma1 <= sigma2");
  const MatrixFieldA a0 = family(0.0), a1 = family(sigma1), a2 = family(sigma2);
  MonotonicityReport r{};
  r.sigma1 = sigma1;
  r.sigma2 = sigma2;
  r.gamma_minus = std::min({a0.gamma_minus(), a1.gamma_minus(), a2.gamma_minus()});
  r.gamma_plus = std::max({a0.gamma_plus(), a1.gamma_plus(), a2.gamma_plus()});
  const Eigen::VectorXd l1 = eigs_L_sigma(a1, sigma1).eigenvalues;
  const Eigen::VectorXd l2 = eigs_L_sigma(a2, sigma2).eigenvalues;
  r.count = std::min<int>(count, static_cast<int>(l1.size()));
  r.differences = l2.head(r.count) / sigma2 - l1.head(r.count) / sigma1;
  r.lower_bound = (sigma2 - sigma1) * r.gamma_minus / (2.0 * sigma2 * sigma2);
  r.upper_bound = 2.0 * (sigma2 - sigma1) * r.gamma_plus / (sigma1 * sigma1);
  r.worst_slack = std::numeric_limits<double>::infinity();
  // Absolute roundoff allowance: eigenvalues are O(|A|), divided by sigma.
  const double tol = 1e-10 * std::max(1.0, r.gamma_plus) / sigma1;
  for (int j = 0; j < r.count; ++j)
    r.worst_slack = std::min({r.worst_slack, r.differences[j] - r.lower_bound,
                              r.upper_bound - r.differences[j]});
  r.holds = r.worst_slack >= -tol;
  return r;
}

int weyl_count(double sigma, double a_plus, double length, int n) {
  if (!(sigma > 0.0)) throw DomainError("weyl_count: sigma must be positive");
  if (!(a_plus > 0.0)) throw DomainError("weyl_count: a_plus must be positive");
  const double shift = a_plus / sigma;
  if (n == 0) n = even_at_least(2.0 * (length / (2.0 * kPi) * std::sqrt(shift) + 8.0), 16);
  const PeriodicGrid g(n, length);
  Eigen::MatrixXd op = -periodic_d2_matrix(g);
  op.diagonal().array() -= shift;
  return count_negative(symmetric_eigenvalues(0.5 * (op + op.transpose())), 1e-9 * shift);
}

int weyl_count(double sigma, double a_plus, const ClosedCurve& curve, int n) {
  return weyl_count(sigma, a_plus, curve.length(), n);
}

double weyl_limit(double a_plus, double length) { return length / kPi * std::sqrt(a_plus); }

Eigen::VectorXd sturm_liouville_eigs(const PeriodicField& curvature, int count) {
  for (int i = 0; i < curvature.grid.n; ++i)
    if (!(curvature.values[i] > 0.0))
      throw PositivityError("sturm_liouville_eigs: curvature must be positive",
                            curvature.grid.point(i));
  if (count < 1 || count > curvature.grid.n)
    throw DomainError("sturm_liouville_eigs: count must lie in 1..n");
  Eigen::MatrixXd a = -periodic_d2_matrix(curvature.grid);
  a = 0.5 * (a + a.transpose());
  const Eigen::MatrixXd b = curvature.values.asDiagonal();
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      a, b, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (eig.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  return eig.eigenvalues().head(count);
}

double LiouvilleTransform::asymptotic_eigenvalue(int j) const {
  return 4.0 * kPi * kPi * j * j / (ell0 * ell0) + q_mean_shift;
}

LiouvilleTransform liouville_transform(const ClosedCurve& curve, int n_t) {
  const double len = curve.length();
  // Trigonometric coefficients of sqrt K on a fine grid.
  const int nf = 1024;
  Eigen::VectorXd root(nf);
  for (int i = 0; i < nf; ++i) {
    const double k = curve(i * len / nf);
    if (!(k > 0.0)) throw PositivityError("liouville_transform: curvature must be positive", i * len / nf);
    root[i] = std::sqrt(k);
  }
  const int kmax = nf / 2 - 1;
  Eigen::VectorXd ca(kmax + 1), sa(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    double c = 0.0, s = 0.0;
    for (int i = 0; i < nf; ++i) {
      const double th = 2.0 * kPi * k * i / nf;
      c += root[i] * std::cos(th);
      s += root[i] * std::sin(th);
    }
    ca[k] = (k == 0 ? 1.0 : 2.0) * c / nf;
    sa[k] = 2.0 * s / nf;
  }
  const double mean = ca[0];
  // Arclength-in-metric s(y) = int_0^y sqrt K.
  auto s_of = [&](double y) {
    double s = mean * y;
    for (int k = 1; k <= kmax; ++k) {
      const double w = 2.0 * kPi * k / len;
      s += (ca[k] * std::sin(w * y) + sa[k] * (1.0 - std::cos(w * y))) / w;
    }
    return s;
  };

  LiouvilleTransform lt;
  lt.ell0 = mean * len;
  lt.t.resize(n_t);
  lt.q.resize(n_t);
  lt.y_of_t.resize(n_t);
  double y = 0.0;
  for (int j = 0; j < n_t; ++j) {
    const double tj = kPi * j / n_t;
    const double target = tj * lt.ell0 / kPi;
    for (int it = 0; it < 60; ++it) {
      const double step = (s_of(y) - target) / std::sqrt(curve(y));
      y -= step;
      if (std::abs(step) < 1e-15 * len) break;
    }
    const CurvatureValue kv = curve.evaluate(y);
    const double psi = std::pow(kv.k, -0.25);
    const double psi2 = 5.0 / 16.0 * std::pow(kv.k, -2.25) * kv.dk * kv.dk -
                        0.25 * std::pow(kv.k, -1.25) * kv.d2k;
    lt.t[j] = tj;
    lt.y_of_t[j] = y;
    lt.q[j] = -lt.ell0 * lt.ell0 * psi2 / (kPi * kPi * psi * kv.k);
  }
  lt.q_mean_shift = kPi * kPi / (lt.ell0 * lt.ell0) * lt.q.mean();
  return lt;
}

Eigen::VectorXd liouville_eigs(const LiouvilleTransform& lt, int count) {
  const PeriodicGrid g(static_cast<int>(lt.t.size()), kPi);
  Eigen::MatrixXd op = -periodic_d2_matrix(g);
  op.diagonal() += lt.q;
  const Eigen::VectorXd nu = symmetric_eigenvalues(0.5 * (op + op.transpose()));
  if (count > nu.size()) throw DomainError("liouville_eigs: count exceeds grid size");
  return (kPi * kPi / (lt.ell0 * lt.ell0)) * nu.head(count);
}

ResonanceAnalyzer::ResonanceAnalyzer(const ClosedCurve& curve, int m,
                                     const ProfileConstants& constants, double sigma_min, int n)
    : constants_(constants), m_(m), sigma_min_(sigma_min) {
  if (m < 2) throw DomainError("resonance analysis needs m >= 2");
  if (!(sigma_min > 0.0)) throw DomainError("ResonanceAnalyzer: sigma_min must be positive");
  const TodaMatrices t = build_matrices(m);
  Eigen::MatrixXd q = t.C_sqrt * layer_weights(m).asDiagonal() * t.C_sqrt;
  mu_ = symmetric_eigenvalues(0.5 * (q + q.transpose())) / (kSqrt2 * constants.beta);

  const int count = 4 * static_cast<int>(std::ceil(1.0 / std::sqrt(sigma_min))) + 20;
  double kmax = 0.0, kmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 256; ++i) {
    const double k = curve(i * curve.length() / 256);
    kmax = std::max(kmax, k);
    kmin = std::min(kmin, k);
  }
  if (n == 0) {
    // Highest wanted mode oscillates about count/2 times per length in the
    // metric sqrt(K); resolve it with a 1.5x margin in the steepest region.
    n = even_at_least(1.5 * count * std::sqrt(kmax / kmin) + 32, 64);
    n = std::min(n, 1024);
  }
  const PeriodicGrid grid(n, curve.length());
  const PeriodicField k = sample_curvature(curve, grid);
  lambda_ = sturm_liouville_eigs(k, std::min(count, n));
  ell0_ = mlac::ell0(curve, grid);
  jacobi_ = jacobi_conditioning(k);
}

ResonanceReport ResonanceAnalyzer::at_sigma(double sigma, double c_gap) const {
  if (!(sigma > 0.0)) throw DomainError("resonance margin: sigma must be positive");
  if (mu_.maxCoeff() / sigma > lambda_[lambda_.size() - 1])
    throw DomainError("resonance margin: sigma below the precomputed spectrum range");
  ResonanceReport r{};
  r.sigma = sigma;
  r.c_gap = c_gap;
  r.mu = mu_;
  const double sigma_cap = scales_of(std::nextafter(kEpsilonMax, 0.0), constants_).sigma;
  r.epsilon = sigma < sigma_cap ? epsilon_of_sigma(sigma, constants_) : 0.0;
  r.nu.resize(mu_.size());
  for (int i = 0; i < mu_.size(); ++i)
    r.nu[i] = r.epsilon > 0.0
                  ? mu_[i] * ell0_ * ell0_ / (4.0 * kPi * kPi) * sigma * std::log(1.0 / r.epsilon)
                  : std::numeric_limits<double>::quiet_NaN();
  const double root = std::sqrt(sigma);
  r.margins.resize(mu_.size(), lambda_.size());
  r.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mu_.size(); ++i)
    for (int j = 0; j < lambda_.size(); ++j) {
      const double v = std::abs(mu_[i] / sigma - lambda_[j]) * root;
      r.margins(i, j) = v;
      if (v < r.min_margin) {
        r.min_margin = v;
        r.critical_mode = i;
        r.critical_index = j;
      }
    }
  r.admissible = r.min_margin >= c_gap;
  return r;
}

ResonanceReport ResonanceAnalyzer::at_epsilon(double epsilon, double c_gap) const {
  const Scales s = scales_of(epsilon, constants_);
  ResonanceReport r = at_sigma(s.sigma, c_gap);
  r.epsilon = epsilon;
  for (int i = 0; i < mu_.size(); ++i)
    r.nu[i] = mu_[i] * ell0_ * ell0_ / (4.0 * kPi * kPi) * s.sigma * std::log(1.0 / epsilon);
  return r;
}

ResonanceReport resonance_margin(double epsilon, const ClosedCurve& curve, int m,
                                 const ProfileConstants& constants, double c_gap) {
  const Scales s = scales_of(epsilon, constants);
  return ResonanceAnalyzer(curve, m, constants, s.sigma).at_epsilon(epsilon, c_gap);
}

namespace {

std::vector<double> log_space(double lo, double hi, int steps) {
  std::vector<double> out;
  if (steps <= 0 || !(hi >= lo)) return out;
  if (steps == 1) return {lo};
  for (int i = 0; i < steps; ++i)
    out.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (steps - 1)));
  return out;
}

void fill_intervals(ScanResult& r, double sigma_lo, double sigma_hi) {
  const int first = static_cast<int>(std::floor(-std::log2(sigma_hi)));
  const int last = static_cast<int>(std::ceil(-std::log2(sigma_lo))) - 1;
  for (int level = first; level <= last; ++level) {
    DyadicBest d{level, std::ldexp(1.0, -level - 1), std::ldexp(1.0, -level), std::nullopt, 0};
    for (const auto& p : r.points) {
      if (p.sigma < d.sigma_low || p.sigma > d.sigma_high) continue;
      if (p.admissible) ++d.admissible_points;
      if (!d.best || p.min_margin > d.best->min_margin) d.best = p;
    }
    r.intervals.push_back(std::move(d));
  }
  for (const auto& p : r.points)
    if (p.admissible && p.epsilon > 0.0) r.admissible_epsilons.push_back(p.epsilon);
}

}  // namespace

ScanResult scan_epsilons(const ResonanceAnalyzer& analyzer, double epsilon_min, double epsilon_max,
                         int steps, double c_gap) {
  ScanResult r;
  if (steps <= 0 || !(epsilon_max >= epsilon_min)) return r;
  if (!(epsilon_min > 0.0) || !(epsilon_max < kEpsilonMax))
    throw DomainError("scan_epsilons: range must lie inside (0, 0.2)");
  const std::vector<double> eps = log_space(epsilon_min, epsilon_max, steps);
  std::vector<double> sigmas;
  for (double e : eps) sigmas.push_back(scales_of(e, analyzer.constants()).sigma);
  r.points = kernels::evaluate_margins(analyzer, sigmas, c_gap);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ResonanceReport& p = r.points[i];
    p.epsilon = eps[i];
    p.nu = p.mu * (analyzer.ell0() * analyzer.ell0() / (4.0 * kPi * kPi) * p.sigma *
                   std::log(1.0 / eps[i]));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double s : sigmas) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  fill_intervals(r, lo, hi);
  return r;
}

ScanResult scan_sigmas(const ResonanceAnalyzer& analyzer, double sigma_min, double sigma_max,
                       int steps, double c_gap) {
  ScanResult r;
  if (steps <= 0 || !(sigma_max >= sigma_min)) return r;
  if (!(sigma_min > 0.0)) throw DomainError("scan_sigmas: sigma must be positive");
  r.points = kernels::evaluate_margins(analyzer, log_space(sigma_min, sigma_max, steps), c_gap);
  fill_intervals(r, sigma_min, sigma_max);
  return r;
}

std::vector<double> detect_resonances(const PeriodicField& curvature, int m, double beta,
                                      double sigma_min, double sigma_max, int samples,
                                      double rel_tol) {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
    throw DomainError("detect_resonances: need 0 < sigma_min < sigma_max");
  const MatrixFieldA a0 = A_at_zero(curvature, m, beta);
  auto negatives = [&](double sigma) { return eigs_L_sigma(a0, sigma).negative_count; };

  std::vector<double> found;
  // Negative count is nonincreasing in sigma; every drop hides a kernel.
  std::function<void(double, double, int, int)> split = [&](double lo, double hi, int nlo, int nhi) {
    if (nlo == nhi) return;
    if (hi / lo - 1.0 < rel_tol) {
      found.push_back(std::sqrt(lo * hi));
      return;
    }
    const double mid = std::sqrt(lo * hi);
    const int nmid = negatives(mid);
    split(lo, mid, nlo, nmid);
    split(mid, hi, nmid, nhi);
  };
  const std::vector<double> s = log_space(sigma_min, sigma_max, samples);
  std::vector<int> counts(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) counts[i] = negatives(s[i]);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) split(s[i], s[i + 1], counts[i], counts[i + 1]);

  std::sort(found.begin(), found.end());
  std::vector<double> out;
  for (double f : found)
    if (out.empty() || f / out.back() - 1.0 > 10.0 * rel_tol) out.push_back(f);
  return out;
}

}  // namespace mlac
