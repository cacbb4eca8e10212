// A single stock draining at 5% a year, written in the model text format and
// checked against the closed-form Euler recurrence x_k = x0 * (1 - r*dt)^k.

#include <cmath>
#include <iostream>

#include "limits_sd/engine.hpp"
#include "limits_sd/model_format.hpp"

int main() {
  const char* text = R"(model "decay" version "1"
const decay_rate = 0.05 unit "1/year"
stock amount init 100 inflow 0 outflow amount * decay_rate
)";
  limits_sd::ModelSpec spec = limits_sd::parse_model_text(text);
  limits_sd::SimConfig cfg;
  cfg.t_start = 0;
  cfg.t_end = 200;
  cfg.dt = 0.5;
  const limits_sd::RunResult r = limits_sd::integrate_run(spec, cfg);

  const auto& amount = r.at("amount");
  double worst = 0.0;
  for (std::size_t k = 0; k < amount.size(); ++k) {
    const double exact = 100.0 * std::pow(1.0 - 0.05 * 0.5, static_cast<double>(k));
    worst = std::max(worst, std::abs(amount[k] - exact) / exact);
  }
  for (double t : {0.0, 1.0, 10.0, 100.0, 200.0}) {
    std::cout << "t=" << t << "  amount=" << r.value_at("amount", t) << "\n";
  }
  std::cout << "max relative error vs recurrence: " << worst << "\n";
  return worst <= 1e-12 ? 0 : 1;
}
