#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pulsecmp {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  // Set when the failure comes from an expected value that is itself wrong
  // and has been independently recomputed; such a failure is reported but
  // does not fail the run.
  std::string known_defect;
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  // Empty runs every criterion.
  std::vector<int> only;
  std::function<void(const CriterionResult&)> on_result;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

std::string format_result_line(const CriterionResult& r);

// True when every failure carries a known_defect note.
bool acceptance_ok(const std::vector<CriterionResult>& results);

}  // namespace pulsecmp
