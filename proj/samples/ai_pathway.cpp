// Adds the AI pollution pathway with the shipped preset and compares it with
// the standard run.

#include <iostream>

#include "limits_sd/report.hpp"

int main() {
  using namespace limits_sd;
  const RunResult bau = run_scenario("bau");
  const RunResult ai = run_scenario("ai_augmented");

  const ComparisonReport pollution = compare_runs(bau, ai, "persistent_pollution");
  const ComparisonReport footprint =
      compare_runs(bau, ai, "human_ecological_footprint", kBenchmarkYears, YearWindow{2020, 2070});
  std::cout << comparison_summary(pollution) << "\n" << comparison_summary(footprint);
  return 0;
}
