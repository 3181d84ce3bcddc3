#include "mlac/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <exception>

#include "mlac/spectral.hpp"

namespace mlac {

namespace {

constexpr double kD2[7] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
constexpr double kD1[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};

inline int reflect(int j, int n) {
  if (j < 0) return -j;
  if (j > n - 1) return 2 * (n - 1) - j;
  return j;
}

inline void strip_row(const StripStencil& s, const Eigen::MatrixXd& u, Eigen::MatrixXd& out, int i) {
  const int nt = static_cast<int>(u.cols());
  const double inv2 = 1.0 / (s.dt * s.dt), inv1 = 1.0 / s.dt;
  const Eigen::RowVectorXd lap_y = s.d2y.row(i) * u;
  for (int j = 0; j < nt; ++j) {
    double a = 0.0, b = 0.0;
    for (int k = -3; k <= 3; ++k) {
      const double v = u(i, reflect(j + k, nt));
      a += kD2[k + 3] * v;
      b += kD1[k + 3] * v;
    }
    out(i, j) = a * inv2 + lap_y[j] + s.drift[i] * s.t[j] * b * inv1;
  }
}

inline double ball_value(const Eigen::MatrixXd& g, int i, int j, double p,
                         const std::vector<std::pair<int, int>>& offsets, double cell) {
  const int ny = static_cast<int>(g.rows()), nt = static_cast<int>(g.cols());
  double acc = 0.0;
  for (const auto& [di, dj] : offsets) {
    const int jj = j + dj;
    if (jj < 0 || jj >= nt) continue;
    const int ii = ((i + di) % ny + ny) % ny;
    const double v = std::abs(g(ii, jj));
    if (p <= 0.0)
      acc = std::max(acc, v);
    else
      acc += std::pow(v, p) * cell;
  }
  return p <= 0.0 ? acc : std::pow(acc, 1.0 / p);
}

}  // namespace

namespace kernels {

void strip_apply(const StripStencil& s, const Eigen::MatrixXd& u, Eigen::MatrixXd& out) {
  out.resize(u.rows(), u.cols());
  const int ny = static_cast<int>(u.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ny; ++i) strip_row(s, u, out, i);
}

double weighted_norm(const Eigen::MatrixXd& g, const Eigen::VectorXd& t, double decay, double p,
                     const std::vector<std::pair<int, int>>& offsets, double cell) {
  const int ny = static_cast<int>(g.rows()), nt = static_cast<int>(g.cols());
  double best = 0.0;
#pragma omp parallel for collapse(2) reduction(max : best) schedule(static)
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nt; ++j)
      best = std::max(best, std::exp(decay * std::abs(t[j])) * ball_value(g, i, j, p, offsets, cell));
  return best;
}

std::vector<ResonanceReport> evaluate_margins(const ResonanceAnalyzer& analyzer,
                                              const std::vector<double>& sigmas, double c_gap) {
  const int n = static_cast<int>(sigmas.size());
  std::vector<ResonanceReport> out(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = analyzer.at_sigma(sigmas[i], c_gap);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace kernels

namespace serial {

void strip_apply(const StripStencil& s, const Eigen::MatrixXd& u, Eigen::MatrixXd& out) {
  out.resize(u.rows(), u.cols());
  for (int i = 0; i < u.rows(); ++i) strip_row(s, u, out, i);
}

double weighted_norm(const Eigen::MatrixXd& g, const Eigen::VectorXd& t, double decay, double p,
                     const std::vector<std::pair<int, int>>& offsets, double cell) {
  double best = 0.0;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      best = std::max(best, std::exp(decay * std::abs(t[j])) * ball_value(g, i, j, p, offsets, cell));
  return best;
}

std::vector<ResonanceReport> evaluate_margins(const ResonanceAnalyzer& analyzer,
                                              const std::vector<double>& sigmas, double c_gap) {
  std::vector<ResonanceReport> out;
  out.reserve(sigmas.size());
  for (double s : sigmas) out.push_back(analyzer.at_sigma(s, c_gap));
  return out;
}

}  // namespace serial

void set_kernel_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace mlac
