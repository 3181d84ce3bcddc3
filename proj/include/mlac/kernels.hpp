#pragma once

// Data-parallel kernels (OpenMP) and their serial references. The serial
// versions in mlac::serial are the ground truth for tests and benchmarks;
// both must agree to roundoff.

#include <Eigen/Dense>
#include <vector>

namespace mlac {

class ResonanceAnalyzer;
struct ResonanceReport;

/// Transverse stencil weights and geometry of a strip discretization.
struct StripStencil {
  Eigen::MatrixXd d2y;    ///< n_y x n_y second derivative in y (already scaled)
  Eigen::VectorXd t;      ///< n_t transverse samples
  Eigen::VectorXd drift;  ///< per-row coefficient c_i of t d/dt (i.e. -eps^2 K(eps y_i))
  double dt;
};

namespace kernels {

/// out = u_tt + D2y u + drift_i t u_t, 6th-order in t with even reflection
/// at both ends.
void strip_apply(const StripStencil& s, const Eigen::MatrixXd& u, Eigen::MatrixXd& out);

/// sup over grid points of e^{decay |t|} (sum over the unit-ball cells of
/// |g|^p w)^{1/p}; p <= 0 means the sup norm. `offsets` lists the ball as
/// (dy index, dt index) pairs, `cell` is the per-cell measure.
double weighted_norm(const Eigen::MatrixXd& g, const Eigen::VectorXd& t, double decay, double p,
                     const std::vector<std::pair<int, int>>& offsets, double cell);

std::vector<ResonanceReport> evaluate_margins(const ResonanceAnalyzer& analyzer,
                                              const std::vector<double>& sigmas, double c_gap);

}  // namespace kernels

namespace serial {

void strip_apply(const StripStencil& s, const Eigen::MatrixXd& u, Eigen::MatrixXd& out);
double weighted_norm(const Eigen::MatrixXd& g, const Eigen::VectorXd& t, double decay, double p,
                     const std::vector<std::pair<int, int>>& offsets, double cell);
std::vector<ResonanceReport> evaluate_margins(const ResonanceAnalyzer& analyzer,
                                              const std::vector<double>& sigmas, double c_gap);

}  // namespace serial

/// Threads used by the parallel kernels; 0 keeps the OpenMP default.
void set_kernel_threads(int threads);

}  // namespace mlac
