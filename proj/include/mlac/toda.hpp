#pragma once

// The Jacobi-Toda system for the layer offsets h_1..h_m: the change of
// variables to gaps v_l = h_{l+1} - h_l and sum v_m, the decoupled gap
// operator
//
//   Sbar(v) = sigma (v'' + K v) + K/beta [1..1] + Sbar0(v),
//   Sbar0(v) = -C [e^{-sqrt2 v_1} .. e^{-sqrt2 v_{m-1}}],
//
// its explicit first-order zero v^1, the sigma^k corrections, and the full
// nonlinear solve. Gap fields are stored as (m-1) x n matrices, one row per
// gap; the grid comes from the curvature field.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mlac/geometry.hpp"
#include "mlac/scales.hpp"

namespace mlac {

struct TodaMatrices {
  int m;
  Eigen::MatrixXd B;           ///< m x m: difference rows, then a row of ones
  Eigen::MatrixXd C;           ///< (m-1) x (m-1) tridiagonal (2, -1)
  Eigen::MatrixXd C_sqrt;      ///< symmetric positive square root of C
  Eigen::MatrixXd C_inv_sqrt;  ///< its inverse
  Eigen::VectorXd C_eigenvalues;  ///< ascending
};

TodaMatrices build_matrices(int m);

/// a_l = (m - l) l, l = 1..m-1.
Eigen::VectorXd layer_weights(int m);

struct LayerStack {
  PeriodicGrid grid;
  Eigen::MatrixXd vbar;  ///< (m-1) x n gaps
  Eigen::VectorXd vm;    ///< sum of offsets
  int m() const { return static_cast<int>(vbar.rows()) + 1; }
};

struct HStack {
  PeriodicGrid grid;
  Eigen::MatrixXd h;  ///< m x n offsets
  int m() const { return static_cast<int>(h.rows()); }
};

LayerStack v_from_h(const HStack& h);
HStack h_from_v(const LayerStack& v);

/// Layer locations f_k = (k - (m+1)/2) rho + h_k, as an m x n matrix.
Eigen::MatrixXd f_from_h(const HStack& h, const Scales& scales);

/// v^1_l = (1/sqrt2) log(2 beta / (K a_l)), the pointwise zero of
/// K/beta + Sbar0; vm = 0.
LayerStack first_order_profile(const PeriodicField& curvature, int m, double beta);

Eigen::MatrixXd S0_bar(const Eigen::MatrixXd& vbar);

Eigen::MatrixXd S_bar(const Eigen::MatrixXd& vbar, double sigma, const PeriodicField& curvature,
                      double beta);

/// Pointwise Jacobian sqrt2 C diag(e^{-sqrt2 v_l}) of Sbar0, one matrix per
/// grid point.
std::vector<Eigen::MatrixXd> DS0_bar(const Eigen::MatrixXd& vbar);

/// v^k = v^1 + omega_1 + ... + omega_{k-1}, Sbar(v^k) = O(sigma^k).
/// Requires 1 <= k <= 6.
LayerStack iterate_corrections(const PeriodicField& curvature, double sigma, double beta, int m,
                               int k);
LayerStack iterate_corrections(const PeriodicField& curvature, const Scales& scales, int m, int k);

/// Dense matrix of Ltilde(omega) = -sigma (omega'' + K omega) - DSbar0(base) omega
/// on gap fields flattened component-major (index = l * n + i).
Eigen::MatrixXd linearized_matrix(const Eigen::MatrixXd& vbar_base, double sigma,
                                  const PeriodicField& curvature);

/// C^{-1/2} Ltilde C^{1/2}, the symmetric form of the linearized operator.
Eigen::MatrixXd symmetrized_linearized_matrix(const Eigen::MatrixXd& vbar_base, double sigma,
                                              const PeriodicField& curvature);

struct Conditioning {
  double smallest_singular_value;
  double median_singular_value;
  double largest_singular_value;
};

struct LinearizedSolution {
  Eigen::MatrixXd omega;
  Conditioning conditioning;
};

/// Numerical resonance threshold: smallest singular value below this
/// fraction of the median singular value.
inline constexpr double kResonanceThreshold = 1e-6;

/// Solves Ltilde omega = g. Throws ResonanceError near a resonance.
LinearizedSolution solve_linearized(const Eigen::MatrixXd& g, const Eigen::MatrixXd& vbar_base,
                                    double sigma, const PeriodicField& curvature);

enum class TodaMethod { fixed_point, newton, automatic };

struct TodaOptions {
  int k_start = 3;
  TodaMethod method = TodaMethod::automatic;
  int max_iterations = 50;
  double tolerance = 1e-12;
  std::optional<Eigen::MatrixXd> gbar;  ///< right side for the gaps (zero if empty)
  std::optional<Eigen::VectorXd> gm;    ///< right side for the sum equation
};

struct TodaSolution {
  LayerStack v;
  HStack h;
  int iterations = 0;
  double residual = 0.0;  ///< sup |Sbar(v) - gbar|
  std::string method;     ///< "fixed_point", "newton" or "continuation"
  Conditioning conditioning;
  std::vector<double> residual_history;
};

TodaSolution solve_toda(const PeriodicField& curvature, double sigma, double beta, int m,
                        const TodaOptions& options = {});
TodaSolution solve_toda(const PeriodicField& curvature, const Scales& scales, int m,
                        const TodaOptions& options = {});

}  // namespace mlac
