#include "mlac/pipeline.hpp"

#include <cmath>

namespace mlac {

TodaOptions toda_options(const RunConfig& config) {
  TodaOptions o;
  o.k_start = config.toda.k;
  o.max_iterations = config.toda.max_iterations;
  o.tolerance = config.toda.tolerance;
  return o;
}

StripSetup strip_setup(const RunConfig& config, double epsilon) {
  const Scales s = scales_of(epsilon);
  const PeriodicGrid yg(config.grid.n_y, config.length);
  const PeriodicField k = sample_curvature(config.curve(), yg);
  const double t_extent = config.grid.t_extent.value_or(auto_t_extent(config.m, s));
  int n_t = config.grid.n_t;
  if (n_t == 0) n_t = 2 * static_cast<int>(std::ceil(t_extent / 0.05)) + 1;
  const StripGrid grid(yg, epsilon, t_extent, n_t);

  std::optional<TodaSolution> toda;
  HStack h{yg, Eigen::MatrixXd::Zero(config.m, yg.n)};
  if (config.m >= 2) {
    toda = solve_toda(k, s, config.m, toda_options(config));
    h = toda->h;
  }
  Eigen::MatrixXd f = f_from_h(h, s);
  return StripSetup{s, grid, k, h, f, toda};
}

}  // namespace mlac
