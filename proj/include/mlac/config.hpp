#pragma once

// Run configuration: JSON ingestion with field-precise validation, defaults,
// canonical serialization and the content hash recorded in run manifests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlac/geometry.hpp"

namespace mlac {

struct EpsilonRange {
  double min, max;
  int steps;
};

struct RunConfig {
  double length = 6.283185307179586;
  CurvatureSpec curvature = ConstantCurvature{1.0};
  int m = 2;
  double epsilon = 0.05;
  std::optional<EpsilonRange> epsilon_range;

  struct Grid {
    int n_y = 16;
    int n_t = 0;                     ///< 0: derived from a spacing of 0.05
    std::optional<double> t_extent;  ///< empty: auto
    int n_curve = 64;                ///< periodic grid for the Toda and spectral solves
  } grid;

  struct Toda {
    int k = 3;
    int max_iterations = 50;
    double tolerance = 1e-12;
  } toda;

  struct Spectral {
    double c_gap = 0.1;
    int eigen_count = 20;
    double sigma = 0.05;
  } spectral;

  struct Output {
    std::string directory = "mlac_out";
    std::vector<std::string> formats = {"json", "csv"};
  } output;

  std::vector<std::string> warnings;  ///< unknown keys in lenient mode

  ClosedCurve curve() const { return ClosedCurve(length, curvature); }
  bool wants(const std::string& format) const;
};

/// Throws ConfigError naming the offending field (or the JSON parse position).
RunConfig parse_config(const std::string& text, bool strict = false);

nlohmann::json to_json(const RunConfig& config);

/// FNV-1a over the canonical (sorted-key, compact) JSON serialization.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace mlac
