#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rggloc {

// Full runs the documented replica counts and wall-clock budgets. Quick
// shrinks replica counts and skips the timing checks so that the output is a
// pure function of the seed.
enum class Scale { Quick, Full };

Scale parse_scale(const std::string& name);
std::string scale_name(Scale scale);

struct AcceptanceOptions {
  Scale scale = Scale::Full;
  std::uint64_t seed = 1;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;   // deterministic summary of the measured quantities
  double seconds = 0.0; // wall clock, never written to result files
};

// Criteria 1 to 13; reproducibility (14) needs the CLI and lives in the
// acceptance driver.
std::vector<int> criterion_ids();
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

// "PASS  3  title: detail"
std::string format_result(const CriterionResult& result);

}  // namespace rggloc
