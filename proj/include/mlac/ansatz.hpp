#pragma once

// The multi-layer approximation u0 on the Fermi strip (y, z), the strip
// operator u_zz + u_yy - eps^2 z K(eps y) u_z with F(u) = u - u^3, the
// layer-window expansion of its residual, weighted decay norms, the
// projected linear problem and a direct Newton solve of the strip equation.
//
// Fields live on an unstretched y-grid over the curve (y~ = eps y) and a
// uniform z-grid on [-T, T]; z is also called t when measured from a layer.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "mlac/geometry.hpp"
#include "mlac/kernels.hpp"
#include "mlac/scales.hpp"
#include "mlac/toda.hpp"

namespace mlac {

struct StripGrid {
  PeriodicGrid y_grid;  ///< unstretched, over the curve length
  double epsilon;
  double t_extent;      ///< half width T in stretched units
  int n_t;              ///< odd, so z = 0 is a node

  StripGrid(PeriodicGrid y, double eps, double t_extent, int n_t);
  int n_y() const { return y_grid.n; }
  double dt() const { return 2.0 * t_extent / (n_t - 1); }
  double t(int j) const { return -t_extent + j * dt(); }
  Eigen::VectorXd t_values() const;
  /// Spacing of the y-grid in stretched units.
  double stretched_dy() const { return y_grid.spacing() / epsilon; }
  bool operator==(const StripGrid&) const = default;
};

/// Default window (m/2 + 1) rho + 6.
double auto_t_extent(int m, const Scales& scales);

struct StripField {
  StripGrid grid;
  Eigen::MatrixXd values;  ///< n_y x n_t

  StripField(StripGrid g, Eigen::MatrixXd v);
  static StripField zeros(const StripGrid& g);
  template <class F>
  static StripField sample(const StripGrid& g, F&& f) {
    Eigen::MatrixXd v(g.n_y(), g.n_t);
    for (int i = 0; i < g.n_y(); ++i)
      for (int j = 0; j < g.n_t; ++j) v(i, j) = f(g.y_grid.point(i), g.t(j));
    return StripField(g, std::move(v));
  }
};

/// u0 = sum_j (-1)^{j-1} w(z - f_j) + ((-1)^{m-1} - 1)/2 at the grid nodes.
/// Throws DomainError if T < (m/2 + 1) rho.
StripField assemble_u0(const Eigen::MatrixXd& f, const StripGrid& grid, const Scales& scales);

StripStencil strip_stencil(const StripGrid& grid, const PeriodicField& curvature);

/// u_zz + u_yy - eps^2 z K u_z, 6th-order in z with Neumann reflection,
/// spectral in y.
StripField strip_operator(const StripField& u, const PeriodicField& curvature);

/// Sparse matrix of strip_operator on row-major unknowns (index i * n_t + j).
Eigen::SparseMatrix<double> strip_operator_matrix(const StripGrid& grid,
                                                  const PeriodicField& curvature);

/// strip_operator(u) + u - u^3.
StripField residual(const StripField& u, const PeriodicField& curvature);

/// Closed-form u0 and its exact residual at arbitrary z, given the layer
/// locations f (m x n_y) on the y-grid; y-derivatives of f are spectral.
class LayerModel {
 public:
  LayerModel(Eigen::MatrixXd f, PeriodicField curvature, double epsilon);
  int m() const { return static_cast<int>(f_.rows()); }
  double value(int i, double z) const;
  double residual(int i, double z) const;
  const Eigen::MatrixXd& f() const { return f_; }
  const Eigen::MatrixXd& f_prime() const { return fp_; }
  const Eigen::MatrixXd& f_second() const { return fpp_; }
  const PeriodicField& curvature() const { return k_; }
  double epsilon() const { return eps_; }

 private:
  Eigen::MatrixXd f_, fp_, fpp_;
  PeriodicField k_;
  double eps_;
};

/// Leading terms of the residual near layer ell (1-based) in the local
/// coordinate t = z - f_ell, already multiplied back by (-1)^{ell-1}.
struct ExpansionTerms {
  Eigen::MatrixXd interaction;  ///< 6(1-w^2) eps^2 rho [neighbour exponentials]
  Eigen::MatrixXd curvature;    ///< -eps^2 (t + f_ell) K w'
  Eigen::MatrixXd jacobi;       ///< -eps^2 h_ell'' w'
  Eigen::MatrixXd gradient;     ///< eps^2 h_ell'^2 w''
  Eigen::MatrixXd total() const { return interaction + curvature + jacobi + gradient; }
};

/// Evaluated on n_y x t_window.size(); |t| must stay within rho/2 + M.
ExpansionTerms expansion_prediction(int ell, const HStack& h, const PeriodicField& curvature,
                                    const Scales& scales, const Eigen::VectorXd& t_window,
                                    double M = 2.0);

/// Unit-ball offsets for the weighted norm at the given stretched spacings.
std::vector<std::pair<int, int>> unit_ball(double dy, double dt, int n_y);

/// sup e^{decay |t|} ||g||_{L^p(B((y,t),1))}; p = infinity for the sup norm.
/// The cell measure is dt * min(dy, 1) so a ball coarser than the y-spacing
/// degenerates to its own column.
double weighted_norm(const StripField& field, double p, double sigma_decay);
double weighted_norm(const Eigen::MatrixXd& values, const Eigen::VectorXd& t, double dy, double p,
                     double sigma_decay);

struct ResidualReport {
  double epsilon, p, sigma_decay;
  double interaction, curvature, jacobi, gradient, remainder;
  double total;
  std::vector<double> per_layer_total;
  std::vector<double> per_layer_remainder;
};

/// Residual of u0 built from h, measured layer by layer on the windows
/// |t| <= rho/2 + M with spacing dt, and compared with the expansion.
ResidualReport residual_report(const HStack& h, const PeriodicField& curvature,
                               const Scales& scales, double p, double sigma_decay, double dt = 0.02,
                               double M = 2.0);

struct ProjectedSolution {
  StripField phi;
  PeriodicField c;
  double orthogonality;  ///< max over y of |int phi w' dt|
};

/// phi_tt + phi_yy + F'(w(t)) phi = g + c(y) w'(t), int phi w' dt = 0 per y.
ProjectedSolution solve_projected(const StripField& g);

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-9;
  bool require_layers = true;  ///< throw unless exactly m level sets per row
};

struct NewtonResult {
  StripField u;
  int iterations;
  double residual;  ///< sup norm
  std::vector<double> residual_history;
  std::vector<double> energy_history;
  Eigen::MatrixXd level_sets;  ///< n_y x count, z of the zero crossings
  int level_set_count;         ///< common count per row, or -1 if rows disagree
};

/// Zero crossings in z at every row, linear interpolation between nodes.
std::vector<std::vector<double>> zero_level_sets(const StripField& u);

/// int 1/2 |grad u|^2 + 1/4 (1 - u^2)^2 on the strip (stretched units).
double strip_energy(const StripField& u);

/// Damped Newton (Armijo on |residual|^2) from u_init.
NewtonResult newton_allen_cahn(const StripField& u_init, const PeriodicField& curvature, int m,
                               const NewtonOptions& options = {});

}  // namespace mlac
