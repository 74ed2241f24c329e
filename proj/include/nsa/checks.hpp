#pragma once

#include <string>
#include <vector>

namespace nsa::checks {

/// Outcome of one release criterion: the measured margins in `detail`,
/// the wall time, and the budget the run must stay under.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

int criterion_count();

/// Runs one criterion (1-based). Exceptions are folded into a failed
/// result; exceeding the budget also fails.
CriterionResult run_criterion(int id);

std::vector<CriterionResult> run_all();

}  // namespace nsa::checks
