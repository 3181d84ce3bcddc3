#pragma once

// The twelve acceptance checks. Each runs its own independent oracle where
// one is needed (adaptive quadrature, bisection, a small algebraic Newton),
// times itself against a budget, and reports measured values in `detail`.

#include <string>
#include <vector>

namespace mlac {

struct CriterionResult {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
  double budget_seconds;
};

/// Runs the selected criteria (all when empty), in id order.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& which = {});

/// One "PASS|FAIL id name: detail (time)" line per criterion.
std::string format_acceptance(const std::vector<CriterionResult>& results);

}  // namespace mlac
