// Runs the built-in World3-03 standard run and prints a few headline series at
// the benchmark years.

#include <cstdio>

#include "limits_sd/scenario.hpp"

int main() {
  const limits_sd::RunResult r = limits_sd::run_scenario("bau");
  std::printf("%6s %14s %14s %14s %10s\n", "year", "population", "ind. output", "pollution", "footprint");
  for (double y : {1900.0, 1950.0, 2000.0, 2020.0, 2040.0, 2060.0, 2080.0, 2100.0}) {
    std::printf("%6.0f %14.4g %14.4g %14.4g %10.3f\n", y, r.value_at("population", y),
                r.value_at("industrial_output", y), r.value_at("persistent_pollution", y),
                r.value_at("human_ecological_footprint", y));
  }
  const auto peak = limits_sd::peak_metrics(r.at("persistent_pollution"), r.times);
  std::printf("persistent pollution peaks at %.1f\n", peak.peak_time);
  return 0;
}
