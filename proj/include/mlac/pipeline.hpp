#pragma once

// Glue between a RunConfig and the solvers, shared by the CLI subcommands
// and the acceptance report.

#include <optional>

#include "mlac/ansatz.hpp"
#include "mlac/config.hpp"
#include "mlac/toda.hpp"

namespace mlac {

TodaOptions toda_options(const RunConfig& config);

/// Layer locations on the strip's y-grid: from a Toda solve for m >= 2,
/// f = 0 for a single layer.
struct StripSetup {
  Scales scales;
  StripGrid grid;
  PeriodicField curvature;
  HStack h;
  Eigen::MatrixXd f;
  std::optional<TodaSolution> toda;
};

StripSetup strip_setup(const RunConfig& config, double epsilon);

}  // namespace mlac
