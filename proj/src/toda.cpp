#include "mlac/toda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mlac/errors.hpp"

namespace mlac {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void check_m(int m) {
  if (m < 2) throw DomainError("Toda system needs m >= 2 layers");
}

void check_gaps(const Eigen::MatrixXd& vbar, const PeriodicField& curvature, const char* who) {
  if (vbar.cols() != curvature.grid.n)
    throw GridMismatchError(std::string(who) + ": gap fields and curvature use different grids");
}

void check_positive(const PeriodicField& curvature) {
  for (int i = 0; i < curvature.grid.n; ++i)
    if (!(curvature.values[i] > 0.0))
      throw PositivityError("curvature must be positive", curvature.grid.point(i));
}

// sigma (D2 x + K x), row by row.
Eigen::MatrixXd jacobi_rows(const Eigen::MatrixXd& x, double sigma, const Eigen::MatrixXd& d2,
                            const Eigen::VectorXd& k) {
  Eigen::MatrixXd out = x * d2.transpose();
  out += x * k.asDiagonal();
  return sigma * out;
}

Eigen::MatrixXd decay(const Eigen::MatrixXd& vbar) {
  return (-kSqrt2 * vbar.array()).exp().matrix();
}

// Solve D(y_i) x_i = rhs_i at every grid point.
Eigen::MatrixXd pointwise_solve(const std::vector<Eigen::MatrixXd>& d, const Eigen::MatrixXd& rhs) {
  Eigen::MatrixXd out(rhs.rows(), rhs.cols());
  for (int i = 0; i < rhs.cols(); ++i) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(d[i]);
    if (std::abs(lu.determinant()) < 1e-300)
      throw NumericalError("pointwise Toda Jacobian is singular");
    out.col(i) = lu.solve(rhs.col(i));
  }
  return out;
}

Eigen::MatrixXd pointwise_apply(const std::vector<Eigen::MatrixXd>& d, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (int i = 0; i < x.cols(); ++i) out.col(i) = d[i] * x.col(i);
  return out;
}

Eigen::MatrixXd flatten_to_matrix(const Eigen::VectorXd& flat, int rows, int cols) {
  Eigen::MatrixXd out(rows, cols);
  for (int l = 0; l < rows; ++l) out.row(l) = flat.segment(l * cols, cols).transpose();
  return out;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.size());
  for (int l = 0; l < x.rows(); ++l) out.segment(l * x.cols(), x.cols()) = x.row(l).transpose();
  return out;
}

Eigen::MatrixXd toda_c(int dim) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    c(i, i) = 2.0;
    if (i + 1 < dim) c(i, i + 1) = c(i + 1, i) = -1.0;
  }
  return c;
}

// Block matrix [sigma (D2 + K) delta_ab + J_ab(y_i)] for a pointwise matrix field J.
Eigen::MatrixXd block_operator(double sigma, const PeriodicField& curvature,
                               const std::vector<Eigen::MatrixXd>& pointwise) {
  const int n = curvature.grid.n;
  const int dim = static_cast<int>(pointwise.front().rows());
  Eigen::MatrixXd jac = periodic_d2_matrix(curvature.grid);
  jac.diagonal() += curvature.values;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim * n, dim * n);
  for (int a = 0; a < dim; ++a) {
    out.block(a * n, a * n, n, n) = sigma * jac;
    for (int b = 0; b < dim; ++b)
      for (int i = 0; i < n; ++i) out(a * n + i, b * n + i) += pointwise[i](a, b);
  }
  return out;
}

double sup_norm(const Eigen::MatrixXd& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TodaMatrices build_matrices(int m) {
  check_m(m);
  TodaMatrices t;
  t.m = m;
  t.B = Eigen::MatrixXd::Zero(m, m);
  for (int l = 0; l + 1 < m; ++l) {
    t.B(l, l) = -1.0;
    t.B(l, l + 1) = 1.0;
  }
  t.B.row(m - 1).setOnes();
  t.C = toda_c(m - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.C);
  t.C_eigenvalues = eig.eigenvalues();
  if (t.C_eigenvalues.minCoeff() <= 0.0) throw NumericalError("C is not positive definite");
  t.C_sqrt = eig.operatorSqrt();
  t.C_inv_sqrt = eig.operatorInverseSqrt();
  return t;
}

Eigen::VectorXd layer_weights(int m) {
  check_m(m);
  Eigen::VectorXd a(m - 1);
  for (int l = 1; l < m; ++l) a[l - 1] = static_cast<double>((m - l) * l);
  return a;
}

LayerStack v_from_h(const HStack& h) {
  const int m = h.m();
  check_m(m);
  const Eigen::MatrixXd v = build_matrices(m).B * h.h;
  return LayerStack{h.grid, v.topRows(m - 1), v.row(m - 1).transpose()};
}

HStack h_from_v(const LayerStack& v) {
  const int m = v.m();
  if (v.vbar.cols() != v.grid.n || v.vm.size() != v.grid.n)
    throw GridMismatchError("h_from_v: inconsistent field sizes");
  Eigen::MatrixXd stacked(m, v.grid.n);
  stacked.topRows(m - 1) = v.vbar;
  stacked.row(m - 1) = v.vm.transpose();
  return HStack{v.grid, build_matrices(m).B.partialPivLu().solve(stacked)};
}

Eigen::MatrixXd f_from_h(const HStack& h, const Scales& scales) {
  const int m = h.m();
  Eigen::MatrixXd f = h.h;
  for (int k = 1; k <= m; ++k) f.row(k - 1).array() += (k - 0.5 * (m + 1)) * scales.rho;
  return f;
}

LayerStack first_order_profile(const PeriodicField& curvature, int m, double beta) {
  check_m(m);
  check_positive(curvature);
  if (!(beta > 0.0)) throw DomainError("first_order_profile: beta must be positive");
  const Eigen::VectorXd a = layer_weights(m);
  Eigen::MatrixXd v(m - 1, curvature.grid.n);
  for (int l = 0; l < m - 1; ++l)
    for (int i = 0; i < curvature.grid.n; ++i)
      v(l, i) = std::log(2.0 * beta / (curvature.values[i] * a[l])) / kSqrt2;
  return LayerStack{curvature.grid, v, Eigen::VectorXd::Zero(curvature.grid.n)};
}

Eigen::MatrixXd S0_bar(const Eigen::MatrixXd& vbar) {
  return -toda_c(static_cast<int>(vbar.rows())) * decay(vbar);
}

Eigen::MatrixXd S_bar(const Eigen::MatrixXd& vbar, double sigma, const PeriodicField& curvature,
                      double beta) {
  check_gaps(vbar, curvature, "S_bar");
  Eigen::MatrixXd out = jacobi_rows(vbar, sigma, periodic_d2_matrix(curvature.grid), curvature.values);
  out.rowwise() += (curvature.values / beta).transpose();
  out += S0_bar(vbar);
  return out;
}

std::vector<Eigen::MatrixXd> DS0_bar(const Eigen::MatrixXd& vbar) {
  const Eigen::MatrixXd c = toda_c(static_cast<int>(vbar.rows()));
  const Eigen::MatrixXd e = decay(vbar);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(vbar.cols());
  for (int i = 0; i < vbar.cols(); ++i) out.push_back(kSqrt2 * c * e.col(i).asDiagonal());
  return out;
}

LayerStack iterate_corrections(const PeriodicField& curvature, double sigma, double beta, int m,
                               int k) {
  if (k < 1 || k > 6) throw DomainError("iterate_corrections: k must lie in 1..6");
  LayerStack v1 = first_order_profile(curvature, m, beta);
  if (k == 1) return v1;

  const Eigen::MatrixXd d2 = periodic_d2_matrix(curvature.grid);
  const std::vector<Eigen::MatrixXd> jac = DS0_bar(v1.vbar);
  const Eigen::MatrixXd s0_base = S0_bar(v1.vbar);
  // N(omega) = Sbar0(v1 + omega) - Sbar0(v1) - DSbar0(v1) omega
  auto remainder = [&](const Eigen::MatrixXd& omega) -> Eigen::MatrixXd {
    return S0_bar(v1.vbar + omega) - s0_base - pointwise_apply(jac, omega);
  };

  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(m - 1, curvature.grid.n);
  Eigen::MatrixXd previous_sum = zero;  // omega_1 + ... + omega_{j-2}
  Eigen::MatrixXd sum = zero;           // omega_1 + ... + omega_{j-1}
  Eigen::MatrixXd omega = -pointwise_solve(jac, jacobi_rows(v1.vbar, sigma, d2, curvature.values));
  sum = omega;
  for (int j = 2; j < k; ++j) {
    const Eigen::MatrixXd rhs = jacobi_rows(omega, sigma, d2, curvature.values) + remainder(sum) -
                                remainder(previous_sum);
    omega = -pointwise_solve(jac, rhs);
    previous_sum = sum;
    sum += omega;
  }
  v1.vbar += sum;
  return v1;
}

LayerStack iterate_corrections(const PeriodicField& curvature, const Scales& scales, int m, int k) {
  return iterate_corrections(curvature, scales.sigma, scales.beta, m, k);
}

Eigen::MatrixXd linearized_matrix(const Eigen::MatrixXd& vbar_base, double sigma,
                                  const PeriodicField& curvature) {
  check_gaps(vbar_base, curvature, "linearized_matrix");
  return -block_operator(sigma, curvature, DS0_bar(vbar_base));
}

Eigen::MatrixXd symmetrized_linearized_matrix(const Eigen::MatrixXd& vbar_base, double sigma,
                                              const PeriodicField& curvature) {
  const int dim = static_cast<int>(vbar_base.rows());
  const TodaMatrices t = build_matrices(dim + 1);
  std::vector<Eigen::MatrixXd> sym = DS0_bar(vbar_base);
  for (auto& d : sym) d = t.C_inv_sqrt * d * t.C_sqrt;
  Eigen::MatrixXd out = -block_operator(sigma, curvature, sym);
  // Remove roundoff asymmetry of the conjugation.
  return 0.5 * (out + out.transpose());
}

namespace {

Conditioning conditioning_of(const Eigen::MatrixXd& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
  Eigen::VectorXd s = eig.eigenvalues().cwiseAbs();
  std::sort(s.data(), s.data() + s.size());
  const Eigen::Index n = s.size();
  const double median = (n % 2) ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  return Conditioning{s[0], median, s[n - 1]};
}

void require_nonresonant(const Conditioning& c) {
  if (c.smallest_singular_value < kResonanceThreshold * c.median_singular_value)
    throw ResonanceError("linearized Toda operator is near resonance (smallest singular value " +
                             std::to_string(c.smallest_singular_value) + ")",
                         c.smallest_singular_value);
}

}  // namespace

LinearizedSolution solve_linearized(const Eigen::MatrixXd& g, const Eigen::MatrixXd& vbar_base,
                                    double sigma, const PeriodicField& curvature) {
  check_gaps(g, curvature, "solve_linearized");
  check_gaps(vbar_base, curvature, "solve_linearized");
  const Conditioning cond =
      conditioning_of(symmetrized_linearized_matrix(vbar_base, sigma, curvature));
  require_nonresonant(cond);
  const Eigen::MatrixXd op = linearized_matrix(vbar_base, sigma, curvature);
  const Eigen::VectorXd x = op.partialPivLu().solve(flatten(g));
  return LinearizedSolution{flatten_to_matrix(x, static_cast<int>(g.rows()), curvature.grid.n), cond};
}

namespace {

// Damped Newton from v with Armijo backtracking on |Sbar(v) - gbar|^2.
// Returns the final sup residual; v is updated in place.
double toda_newton(Eigen::MatrixXd& v, double sigma, const PeriodicField& curvature, double beta,
                   const Eigen::MatrixXd& gbar, const TodaOptions& options, int& iterations,
                   std::vector<double>& history) {
  const int m = static_cast<int>(v.rows()) + 1;
  const int n = static_cast<int>(v.cols());
  Eigen::MatrixXd r = S_bar(v, sigma, curvature, beta) - gbar;
  double residual = sup_norm(r);
  for (iterations = 0; iterations < options.max_iterations && residual > options.tolerance; ++iterations) {
    const Eigen::MatrixXd jmat = block_operator(sigma, curvature, DS0_bar(v));
    const Eigen::MatrixXd step = flatten_to_matrix(jmat.partialPivLu().solve(-flatten(r)), m - 1, n);
    const double merit = r.squaredNorm();
    double alpha = 1.0;
    Eigen::MatrixXd trial, trial_r;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      trial = v + alpha * step;
      trial_r = S_bar(trial, sigma, curvature, beta) - gbar;
      if (trial_r.allFinite() && trial_r.squaredNorm() <= (1.0 - 1e-4 * alpha) * merit) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    v = trial;
    r = trial_r;
    residual = sup_norm(r);
    history.push_back(residual);
  }
  return residual;
}

}  // namespace

namespace {

// Newton along a path of sigma values from a solved anchor towards the target.
bool march_sigma(Eigen::MatrixXd& v, double from, double to, const PeriodicField& curvature, double beta,
                 const Eigen::MatrixXd& gbar, const TodaOptions& options, int& iterations,
                 std::vector<double>& history) {
  const double span = std::log(to / from);
  double done = 0.0, step = 0.25;
  while (done < 1.0) {
    const double next = std::min(1.0, done + step);
    Eigen::MatrixXd trial = v;
    int hit = 0;
    const double res = toda_newton(trial, from * std::exp(next * span), curvature, beta, gbar, options,
                                   hit, history);
    iterations += hit;
    if (res <= options.tolerance) {
      v = std::move(trial);
      done = next;
      step = std::min(0.5, 1.5 * step);
    } else if ((step *= 0.5) < 1e-3) {
      return false;
    }
  }
  return true;
}

TodaSolution solve_toda_core(const PeriodicField& curvature, double sigma, double beta, int m,
                             const TodaOptions& options, bool allow_continuation) {
  check_m(m);
  if (options.k_start < 1 || options.k_start > 6) throw DomainError("solve_toda: k_start must lie in 1..6");
  const int n = curvature.grid.n;
  const Eigen::MatrixXd gbar = options.gbar.value_or(Eigen::MatrixXd::Zero(m - 1, n));
  const Eigen::VectorXd gm = options.gm.value_or(Eigen::VectorXd::Zero(n));
  check_gaps(gbar, curvature, "solve_toda");
  if (gm.size() != n) throw GridMismatchError("solve_toda: gm has the wrong size");

  // Sum equation sigma (vm'' + K vm) = gm needs a nondegenerate Jacobi operator.
  const JacobiConditioning jc = jacobi_conditioning(curvature);
  if (jc.degenerate)
    throw ResonanceError("Jacobi operator of the curve is degenerate", jc.smallest_singular_value);
  Eigen::MatrixXd jac = periodic_d2_matrix(curvature.grid);
  jac.diagonal() += curvature.values;
  const Eigen::VectorXd vm = (sigma * jac).partialPivLu().solve(gm);

  auto residual_of = [&](const Eigen::MatrixXd& v) {
    return sup_norm(S_bar(v, sigma, curvature, beta) - gbar);
  };
  // The corrections form an asymptotic series; outside its range a higher
  // k is a worse start, so begin from the best of v^1..v^k.
  LayerStack vk = iterate_corrections(curvature, sigma, beta, m, 1);
  for (int k = 2; k <= options.k_start; ++k) {
    LayerStack candidate = iterate_corrections(curvature, sigma, beta, m, k);
    if (candidate.vbar.allFinite() && residual_of(candidate.vbar) < residual_of(vk.vbar))
      vk = std::move(candidate);
  }

  TodaSolution out{LayerStack{curvature.grid, vk.vbar, vm}, HStack{curvature.grid, {}}, 0, 0.0, "", {}, {}};
  const Eigen::MatrixXd base_op = linearized_matrix(vk.vbar, sigma, curvature);
  out.conditioning = conditioning_of(symmetrized_linearized_matrix(vk.vbar, sigma, curvature));
  require_nonresonant(out.conditioning);

  bool converged = false;
  Eigen::MatrixXd v = vk.vbar;
  double residual = residual_of(v);
  out.residual_history.push_back(residual);

  if (options.method != TodaMethod::newton) {
    // omega <- Ltilde^{-1} (Sbar(v^k) + N1(omega) - gbar)
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(base_op);
    const Eigen::MatrixXd s_base = S_bar(vk.vbar, sigma, curvature, beta);
    const Eigen::MatrixXd s0_base = S0_bar(vk.vbar);
    const std::vector<Eigen::MatrixXd> d_base = DS0_bar(vk.vbar);
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(m - 1, n);
    double best = residual;
    int since_best = 0;
    for (int it = 1; it <= options.max_iterations && residual > options.tolerance; ++it) {
      const Eigen::MatrixXd n1 = S0_bar(vk.vbar + omega) - s0_base - pointwise_apply(d_base, omega);
      const Eigen::MatrixXd rhs = s_base + n1 - gbar;
      omega = flatten_to_matrix(lu.solve(flatten(rhs)), m - 1, n);
      if (!omega.allFinite()) break;
      residual = residual_of(vk.vbar + omega);
      out.residual_history.push_back(residual);
      out.iterations = it;
      if (residual < best) {
        best = residual;
        since_best = 0;
      } else if (++since_best >= 5) {
        break;
      }
    }
    if (residual <= options.tolerance) {
      converged = true;
      v = vk.vbar + omega;
      out.method = "fixed_point";
    } else if (options.method == TodaMethod::fixed_point) {
      throw ConvergenceError("solve_toda: fixed-point iteration failed to contract",
                             out.iterations, residual);
    }
  }

  if (!converged) {
    v = vk.vbar;
    int it = 0;
    residual = toda_newton(v, sigma, curvature, beta, gbar, options, it, out.residual_history);
    out.iterations += it;
    out.method = "newton";
    if (residual > options.tolerance && !allow_continuation)
      throw ConvergenceError("solve_toda: damped Newton did not converge", out.iterations, residual);
    if (residual > options.tolerance) {
      // Newton can stall far from the solution when K varies strongly.
      // Continue in the amplitude of K - mean(K) from the constant-curvature solution.
      const double kmean = curvature.values.mean();
      auto field_at = [&](double delta) {
        PeriodicField k = curvature;
        k.values = Eigen::VectorXd::Constant(n, kmean) + delta * (curvature.values.array() - kmean).matrix();
        return k;
      };
      Eigen::MatrixXd w = first_order_profile(field_at(0.0), m, beta).vbar;
      double done = 0.0, step = 0.25;
      int hit = 0;
      bool ok = toda_newton(w, sigma, field_at(0.0), beta, gbar, options, hit, out.residual_history) <=
                options.tolerance;
      out.iterations += hit;
      while (ok && done < 1.0) {
        const double next = std::min(1.0, done + step);
        Eigen::MatrixXd trial = w;
        hit = 0;
        const double res = toda_newton(trial, sigma, field_at(next), beta, gbar, options, hit,
                                       out.residual_history);
        out.iterations += hit;
        if (res <= options.tolerance) {
          w = std::move(trial);
          done = next;
          step = std::min(0.5, 1.5 * step);
        } else if ((step *= 0.5) < 1e-3) {
          ok = false;
        }
      }
      // The amplitude branch can fold; then continue in sigma from a nearby solvable coupling.
      for (double factor : {1.25, 0.8, 1.6, 0.625, 2.0, 0.5}) {
        if (ok) break;
        try {
          TodaSolution anchor = solve_toda_core(curvature, factor * sigma, beta, m, options, false);
          w = anchor.v.vbar;
          out.iterations += anchor.iterations;
          ok = march_sigma(w, factor * sigma, sigma, curvature, beta, gbar, options, out.iterations,
                           out.residual_history);
        } catch (const ConvergenceError&) {
        } catch (const ResonanceError&) {
        }
      }
      if (!ok)
        throw ConvergenceError("solve_toda: damped Newton did not converge", out.iterations, residual);
      v = std::move(w);
      residual = residual_of(v);
      out.method = "continuation";
    }
  }

  out.v.vbar = v;
  out.residual = residual;
  out.h = h_from_v(out.v);
  return out;
}

}  // namespace

TodaSolution solve_toda(const PeriodicField& curvature, double sigma, double beta, int m,
                        const TodaOptions& options) {
  return solve_toda_core(curvature, sigma, beta, m, options, true);
}

TodaSolution solve_toda(const PeriodicField& curvature, const Scales& scales, int m,
                        const TodaOptions& options) {
  return solve_toda(curvature, scales.sigma, scales.beta, m, options);
}

}  // namespace mlac
