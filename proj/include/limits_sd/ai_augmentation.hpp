#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limits_sd/errors.hpp"
#include "limits_sd/model_format.hpp"
#include "limits_sd/model_spec.hpp"
#include "limits_sd/number_format.hpp"
#include "limits_sd/world3.hpp"

namespace limits_sd {

/// Coefficients of the AI persistent-pollution pathway.
///
/// Generation after activation is
///   fioai * industrial_output * (carbon(t) + ewaste(t)) * conversion_const
/// where each coefficient decays exponentially from its initial value and is
/// floored at coeff_floor times that initial value.
struct AiParams {
  double fioai = 0.02;
  double carbon_coeff_initial = 0.0;
  double ewaste_coeff_initial = 0.0;
  double carbon_decline_rate = 0.0;
  double ewaste_decline_rate = 0.0;
  double coeff_floor = 0.2;
  double conversion_const = 1.0;
  double activation_year = 2020.0;

  friend bool operator==(const AiParams&, const AiParams&) = default;
};

/// Field table shared by the preset format, the augmented constants and the
/// calibration parameter vector.
struct AiField {
  const char* key;           // preset key
  const char* element;       // constant name in the augmented model
  double AiParams::*member;
};

inline constexpr std::array<AiField, 8> kAiFields{{
    {"fioai", "ai_fraction_of_industrial_output", &AiParams::fioai},
    {"carbon_coeff_initial", "ai_carbon_coefficient_initial", &AiParams::carbon_coeff_initial},
    {"ewaste_coeff_initial", "ai_ewaste_coefficient_initial", &AiParams::ewaste_coeff_initial},
    {"carbon_decline_rate", "ai_carbon_coefficient_decline_rate", &AiParams::carbon_decline_rate},
    {"ewaste_decline_rate", "ai_ewaste_coefficient_decline_rate", &AiParams::ewaste_decline_rate},
    {"coeff_floor", "ai_coefficient_floor", &AiParams::coeff_floor},
    {"conversion_const", "ai_pollution_conversion_constant", &AiParams::conversion_const},
    {"activation_year", "ai_activation_year", &AiParams::activation_year},
}};

inline constexpr const char* kAiCarbonCoefficient = "ai_carbon_coefficient";
inline constexpr const char* kAiEwasteCoefficient = "ai_ewaste_coefficient";
inline constexpr const char* kPollutionGenerationAi = "persistent_pollution_generation_ai";
inline constexpr const char* kAiSector = "pollution";

inline const AiField* find_ai_field(std::string_view key) {
  for (const auto& f : kAiFields) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

/// Throws InvalidConfig when a field leaves its documented range.
inline void validate_ai_params(const AiParams& p) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw InvalidConfig("AI parameters: " + msg);
  };
  for (const auto& f : kAiFields) need(std::isfinite(p.*f.member), std::string(f.key) + " must be finite");
  need(p.fioai >= 0.0 && p.fioai <= 1.0, "fioai must lie in [0, 1]");
  need(p.carbon_coeff_initial >= 0.0 && p.ewaste_coeff_initial >= 0.0, "coefficients must be nonnegative");
  need(p.carbon_decline_rate >= 0.0 && p.ewaste_decline_rate >= 0.0, "decline rates must be nonnegative");
  need(p.coeff_floor >= 0.0 && p.coeff_floor <= 1.0, "coeff_floor must lie in [0, 1]");
  need(p.conversion_const >= 0.0, "conversion_const must be nonnegative");
  need(p.activation_year >= 1900.0 && p.activation_year <= 2100.0, "activation_year must lie in [1900, 2100]");
}

/// max(floor * initial, initial * exp(-rate * (t - t0))); times before t0 are
/// treated as t0.
inline double declining_coefficient(double initial, double rate, double floor_mult, double t, double t0) {
  const double elapsed = std::max(0.0, t - t0);
  return std::max(floor_mult * initial, initial * std::exp(-rate * elapsed));
}

inline double pp_generation_ai(double industrial_output, double t, const AiParams& p) {
  if (t < p.activation_year) return 0.0;
  const double carbon =
      declining_coefficient(p.carbon_coeff_initial, p.carbon_decline_rate, p.coeff_floor, t, p.activation_year);
  const double ewaste =
      declining_coefficient(p.ewaste_coeff_initial, p.ewaste_decline_rate, p.coeff_floor, t, p.activation_year);
  return p.fioai * industrial_output * (carbon + ewaste) * p.conversion_const;
}

namespace detail {

inline std::string coefficient_expression(const char* initial, const char* rate) {
  return std::string("max(ai_coefficient_floor * ") + initial + ", " + initial + " * exp(-" + rate +
         " * max(0, time - ai_activation_year)))";
}

}  // namespace detail

/// The 11 elements added by augment_model, in declaration order.
inline std::vector<Element> ai_pathway_elements(const AiParams& p) {
  std::vector<Element> out;
  for (const auto& f : kAiFields) out.push_back(make_constant(f.element, p.*f.member, kAiSector));
  out.push_back(make_auxiliary(
      kAiCarbonCoefficient,
      parse_expression(detail::coefficient_expression("ai_carbon_coefficient_initial",
                                                      "ai_carbon_coefficient_decline_rate")),
      kAiSector));
  out.push_back(make_auxiliary(
      kAiEwasteCoefficient,
      parse_expression(detail::coefficient_expression("ai_ewaste_coefficient_initial",
                                                      "ai_ewaste_coefficient_decline_rate")),
      kAiSector));
  out.push_back(make_auxiliary(
      kPollutionGenerationAi,
      parse_expression("clip(ai_fraction_of_industrial_output * industrial_output * (ai_carbon_coefficient + "
                       "ai_ewaste_coefficient) * ai_pollution_conversion_constant, 0, time, ai_activation_year)"),
      kAiSector));
  return out;
}

/// Returns `spec` with the AI pathway added and its output summed into the
/// persistent pollution generation rate. Nothing else changes.
inline ModelSpec augment_model(ModelSpec spec, const AiParams& p) {
  validate_ai_params(p);
  for (const char* hook : {world3::kPollutionGenerationRate, world3::kIndustrialOutput}) {
    if (!spec.contains(hook)) throw MissingHook(hook);
  }
  const Element& rate = spec.at(world3::kPollutionGenerationRate);
  if (rate.kind() != ElementKind::Auxiliary) throw MissingHook(world3::kPollutionGenerationRate);

  Element updated = rate;
  updated.def = AuxiliaryDef{
      Expression::binary('+', rate.as<AuxiliaryDef>().expr, Expression::variable(kPollutionGenerationAi))};
  spec.replace(std::move(updated));
  for (auto& e : ai_pathway_elements(p)) spec.add(std::move(e));
  return build_dependency_graph(std::move(spec));
}

// ---- preset files: "key = value" lines, '#' comments ---------------------

inline AiParams parse_ai_preset(std::string_view text) {
  AiParams p;
  std::array<bool, kAiFields.size()> seen{};
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto trim = [](std::string_view s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string_view::npos) return std::string_view{};
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "preset line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw FormatError(where + "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const AiField* f = find_ai_field(key);
    if (!f) throw FormatError(where + "unknown key '" + std::string(key) + "'");
    const auto idx = static_cast<std::size_t>(f - kAiFields.data());
    if (seen[idx]) throw FormatError(where + "duplicate key '" + std::string(key) + "'");
    auto v = parse_number(trim(line.substr(eq + 1)));
    if (!v) throw FormatError(where + "value of '" + std::string(key) + "' is not a number");
    p.*f->member = *v;
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < kAiFields.size(); ++i) {
    if (!seen[i] && std::string_view(kAiFields[i].key) != "activation_year") {
      throw FormatError(std::string("preset is missing key '") + kAiFields[i].key + "'");
    }
  }
  validate_ai_params(p);
  return p;
}

inline std::string format_ai_preset(const AiParams& p, const std::vector<std::string>& comments = {}) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  for (const auto& f : kAiFields) out += std::string(f.key) + " = " + format_number(p.*f.member) + "\n";
  return out;
}

/// The shipped calibrated preset.
inline AiParams default_ai_params() { return parse_ai_preset(embedded::ai_params_preset); }

}  // namespace limits_sd
