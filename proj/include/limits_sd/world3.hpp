#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "limits_sd/embedded_data.hpp"
#include "limits_sd/errors.hpp"
#include "limits_sd/model_format.hpp"
#include "limits_sd/model_spec.hpp"

namespace limits_sd {

/// 64-bit FNV-1a hash, used as the corpus checksum.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string checksum_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline constexpr std::string_view kWorld3CorpusId = "world3-03";

/// Embedded corpus text, as shipped.
inline std::string_view world3_corpus_text() { return embedded::world3_corpus; }

inline std::uint64_t world3_corpus_checksum() { return embedded::world3_corpus_checksum; }

/// Parses `text` after checking it against `expected_checksum`.
inline ModelSpec load_corpus_text(std::string_view text, std::uint64_t expected_checksum) {
  const std::uint64_t actual = fnv1a64(text);
  if (actual != expected_checksum) {
    throw CorpusCorrupt("corpus checksum mismatch: expected " + checksum_hex(expected_checksum) +
                        ", got " + checksum_hex(actual));
  }
  return parse_model_text(text);
}

/// The validated World3-03 model with the footprint block.
inline ModelSpec load_world3_corpus() {
  return load_corpus_text(world3_corpus_text(), world3_corpus_checksum());
}

// Names the AI pathway and the scenario metrics hook into.
namespace world3 {
inline constexpr const char* kIndustrialOutput = "industrial_output";
inline constexpr const char* kPersistentPollution = "persistent_pollution";
inline constexpr const char* kPollutionGenerationRate = "persistent_pollution_generation_rate";
inline constexpr const char* kPollutionGenerationIndustry = "persistent_pollution_generation_industry";
inline constexpr const char* kPollutionGenerationAgriculture = "persistent_pollution_generation_agriculture";
inline constexpr const char* kHumanEcologicalFootprint = "human_ecological_footprint";
inline constexpr const char* kNonrenewableResourcesInitial = "nonrenewable_resources_initial";
}  // namespace world3

struct PollutionSectorBindings {
  double population = 0.0;                             // persons
  double per_capita_resource_use_multiplier = 0.0;     // resource units / person-year
  double fraction_resources_persistent = 0.0;
  double industrial_materials_emission_factor = 0.0;
  double industrial_materials_toxicity_index = 0.0;    // pollution units / resource unit
  double arable_land = 0.0;                            // hectares
  double agricultural_inputs_per_hectare = 0.0;        // dollars / hectare-year
  double fraction_agricultural_inputs_persistent = 0.0;
  double agricultural_materials_toxicity_index = 0.0;  // pollution units / dollar
  double persistent_pollution_generation_rate = 0.0;   // pollution units / year
  double persistent_pollution_stock = 0.0;             // pollution units
  double assimilation_half_life = 0.0;                 // years
};

inline double pp_generation_industry(const PollutionSectorBindings& b) {
  return b.population * b.per_capita_resource_use_multiplier * b.fraction_resources_persistent *
         b.industrial_materials_emission_factor * b.industrial_materials_toxicity_index;
}

inline double pp_generation_agriculture(const PollutionSectorBindings& b) {
  return b.arable_land * b.agricultural_inputs_per_hectare * b.fraction_agricultural_inputs_persistent *
         b.agricultural_materials_toxicity_index;
}

/// Land areas in hectares. Absorption land is k_absorption hectares per unit
/// of pollution generated per year; the sum is divided by the normalization
/// area (total biologically productive land).
struct FootprintBindings {
  double arable_land = 0.0;
  double urban_land = 0.0;
  double persistent_pollution_generation_rate = 0.0;
  double k_absorption = 4.0;
  double normalization = 1.91e9;

  double absorption_land() const { return k_absorption * persistent_pollution_generation_rate; }
};

inline double human_ecological_footprint(const FootprintBindings& f) {
  auto check = [](double v, const char* what) {
    if (!(v >= 0.0)) throw NegativeComponent(std::string(what) + " must be nonnegative");
  };
  check(f.arable_land, "arable land");
  check(f.urban_land, "urban land");
  check(f.persistent_pollution_generation_rate, "pollution generation rate");
  check(f.k_absorption, "absorption coefficient");
  if (!(f.normalization > 0.0)) throw NegativeComponent("normalization area must be positive");
  return (f.arable_land + f.urban_land + f.absorption_land()) / f.normalization;
}

}  // namespace limits_sd
