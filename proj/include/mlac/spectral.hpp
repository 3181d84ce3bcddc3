#pragma once

// Spectral side of the gap linearization: the matrix potential A(y, sigma),
// the self-adjoint operator L_sigma = -sigma d^2/dy^2 - A, its eigenvalues,
// Weyl counting, the weighted Sturm-Liouville problem -phi'' = lambda K phi,
// its Liouville normal form, and the resonance margins that decide which
// epsilon (equivalently sigma) are admissible.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "mlac/geometry.hpp"
#include "mlac/profile.hpp"
#include "mlac/toda.hpp"

namespace mlac {

struct MatrixFieldA {
  PeriodicGrid grid;
  int dim;                              ///< m - 1
  std::vector<Eigen::MatrixXd> entries;  ///< one symmetric dim x dim matrix per grid point
  /// Pointwise extreme eigenvalues over the grid.
  double gamma_minus() const;
  double gamma_plus() const;
};

/// A = sigma K I + sqrt2 C^{1/2} diag(e^{-sqrt2 v_l}) C^{1/2}.
MatrixFieldA assemble_A(const Eigen::MatrixXd& vbar, double sigma, const PeriodicField& curvature,
                        const TodaMatrices& matrices);

/// Closed form at sigma = 0, v = v^1: K/(sqrt2 beta) C^{1/2} diag(a) C^{1/2}.
MatrixFieldA A_at_zero(const PeriodicField& curvature, int m, double beta);

/// Dense symmetric matrix of -sigma d^2/dy^2 - A, component-major.
Eigen::MatrixXd assemble_L_sigma(const MatrixFieldA& a, double sigma);

struct EigenReport {
  double sigma;
  Eigen::VectorXd eigenvalues;  ///< ascending
  int negative_count;
};

EigenReport eigs_L_sigma(const MatrixFieldA& a, double sigma);

using AFamily = std::function<MatrixFieldA(double sigma)>;

/// A(., sigma) with the gaps held fixed.
AFamily frozen_family(Eigen::MatrixXd vbar, PeriodicField curvature);

struct MonotonicityReport {
  double sigma1, sigma2;
  double gamma_minus, gamma_plus;
  int count;
  Eigen::VectorXd differences;  ///< sigma2^{-1} lambda_j(sigma2) - sigma1^{-1} lambda_j(sigma1)
  double lower_bound;           ///< (sigma2 - sigma1) gamma_- / (2 sigma2^2)
  double upper_bound;           ///< 2 (sigma2 - sigma1) gamma_+ / sigma1^2
  double worst_slack;           ///< min over j of both slacks; >= 0 means both hold
  bool holds;
};

/// Checks the two-sided eigenvalue monotonicity bound for the lowest `count`
/// eigenvalues. gamma_-/+ are the ellipticity bounds of A over sigma in
/// [0, sigma2], measured at sigma = 0, sigma1, sigma2 (A is affine in sigma).
MonotonicityReport monotonicity_check(double sigma1, double sigma2, const AFamily& family,
                                      int count = 20);

/// Negative eigenvalues of -d^2/dy^2 - a_plus/sigma on a circle of the given
/// length. Eigenvalues within 1e-9 a_plus/sigma of zero are not negative.
/// n = 0 picks a grid resolving every candidate mode.
int weyl_count(double sigma, double a_plus, double length, int n = 0);
int weyl_count(double sigma, double a_plus, const ClosedCurve& curve, int n = 0);

/// Weyl limit (length/pi) sqrt(a_plus).
double weyl_limit(double a_plus, double length);

/// Smallest `count` eigenvalues of -phi'' = lambda K phi (periodic).
Eigen::VectorXd sturm_liouville_eigs(const PeriodicField& curvature, int count);

struct LiouvilleTransform {
  double ell0;
  Eigen::VectorXd t;          ///< uniform samples of [0, pi)
  Eigen::VectorXd q;          ///< potential at t
  Eigen::VectorXd y_of_t;     ///< inverse map samples
  double q_mean_shift;        ///< (pi/ell0)^2 mean(q) = (1/ell0) int Psi'^2 dy
  /// 4 pi^2 j^2 / ell0^2 + q_mean_shift, the large-j eigenvalue pair location.
  double asymptotic_eigenvalue(int j) const;
};

/// t(y) = (pi/ell0) int_0^y sqrt K, Psi = K^{-1/4}, and the normal-form
/// potential q = -ell0^2 Psi'' / (pi^2 Psi K), so that the weighted problem
/// becomes -psi_tt + q psi = (ell0/pi)^2 lambda psi, pi-periodic.
/// Raw samples are smoothed by trigonometric interpolation.
LiouvilleTransform liouville_transform(const ClosedCurve& curve, int n_t = 256);

/// Smallest `count` lambda from the transformed problem (scaled back).
Eigen::VectorXd liouville_eigs(const LiouvilleTransform& lt, int count);

struct ResonanceReport {
  double epsilon;  ///< 0 when evaluated directly in sigma beyond the epsilon range
  double sigma;
  Eigen::MatrixXd margins;  ///< (m-1) x count, |sigma^{-1} mu_i - lambda_j| sqrt(sigma)
  Eigen::VectorXd mu;
  Eigen::VectorXd nu;       ///< mu_i ell0^2/(4 pi^2) sigma log(1/epsilon)
  double min_margin;
  int critical_mode;        ///< i and j attaining min_margin
  int critical_index;
  bool admissible;
  double c_gap;
};

/// Precomputes the weighted spectrum and the mode couplings
/// mu_i = Lambda_i/(sqrt2 beta), Lambda_i the eigenvalues of C^{1/2} diag(a) C^{1/2}.
class ResonanceAnalyzer {
 public:
  ResonanceAnalyzer(const ClosedCurve& curve, int m, const ProfileConstants& constants,
                    double sigma_min, int n = 0);

  ResonanceReport at_sigma(double sigma, double c_gap) const;
  ResonanceReport at_epsilon(double epsilon, double c_gap) const;

  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& lambdas() const { return lambda_; }
  double ell0() const { return ell0_; }
  const JacobiConditioning& jacobi() const { return jacobi_; }
  const ProfileConstants& constants() const { return constants_; }
  /// Smallest sigma the precomputed spectrum covers.
  double sigma_min() const { return sigma_min_; }

 private:
  ProfileConstants constants_;
  int m_;
  double sigma_min_;
  double ell0_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd lambda_;
  JacobiConditioning jacobi_;
};

ResonanceReport resonance_margin(double epsilon, const ClosedCurve& curve, int m,
                                 const ProfileConstants& constants, double c_gap);

struct DyadicBest {
  int level;  ///< interval [2^{-level-1}, 2^{-level}] in sigma
  double sigma_low, sigma_high;
  std::optional<ResonanceReport> best;  ///< empty if no scanned point falls inside
  int admissible_points;
};

struct ScanResult {
  std::vector<ResonanceReport> points;  ///< input order
  std::vector<DyadicBest> intervals;
  std::vector<double> admissible_epsilons;
};

/// Log-spaced epsilon sweep (parallel over points).
ScanResult scan_epsilons(const ResonanceAnalyzer& analyzer, double epsilon_min, double epsilon_max,
                         int steps, double c_gap);
/// Same sweep directly in sigma; ResonanceReport::epsilon is set when the
/// sigma lies in the admissible epsilon range.
ScanResult scan_sigmas(const ResonanceAnalyzer& analyzer, double sigma_min, double sigma_max,
                       int steps, double c_gap);

/// Sigma values in [sigma_min, sigma_max] where L_sigma built from A(., 0)
/// acquires a kernel, located by bisection on the negative count to
/// `rel_tol`. Returned ascending, one entry per crossing.
std::vector<double> detect_resonances(const PeriodicField& curvature, int m, double beta,
                                      double sigma_min, double sigma_max, int samples = 400,
                                      double rel_tol = 1e-10);

}  // namespace mlac
