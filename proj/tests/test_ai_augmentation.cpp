#include <gtest/gtest.h>

#include <cmath>

#include "limits_sd/ai_augmentation.hpp"
#include "limits_sd/engine.hpp"

using namespace limits_sd;

namespace {

const ModelSpec& corpus() {
  static const ModelSpec spec = load_world3_corpus();
  return spec;
}

const RunResult& bau() {
  static const RunResult r = integrate_run(corpus(), {});
  return r;
}

AiParams sample_params(double fioai = 0.02) {
  AiParams p;
  p.fioai = fioai;
  p.carbon_coeff_initial = 4e-3;
  p.ewaste_coeff_initial = 1e-3;
  p.carbon_decline_rate = 0.03;
  p.ewaste_decline_rate = 0.02;
  p.coeff_floor = 0.25;
  return p;
}

}  // namespace

TEST(DecliningCoefficient, BoundaryNoDeclineAndFloor) {
  EXPECT_EQ(declining_coefficient(3.0, 0.1, 0.2, 2020, 2020), 3.0);
  for (double t : {2020.0, 2050.0, 2100.0}) EXPECT_EQ(declining_coefficient(3.0, 0.0, 0.2, t, 2020), 3.0);
  EXPECT_EQ(declining_coefficient(1.0, 0.1, 0.2, 2050, 2020), 0.2);
  EXPECT_DOUBLE_EQ(declining_coefficient(1.0, 0.1, 0.01, 2050, 2020), std::exp(-3.0));
}

TEST(DecliningCoefficient, NeverBelowFloor) {
  for (double t = 2020; t <= 2300; t += 7) {
    EXPECT_GE(declining_coefficient(2.0, 0.08, 0.3, t, 2020), 0.3 * 2.0);
  }
}

TEST(PollutionGenerationAi, Oracles) {
  AiParams p;
  p.fioai = 0.02;
  p.carbon_coeff_initial = 6e-5;
  p.ewaste_coeff_initial = 4e-5;
  EXPECT_DOUBLE_EQ(pp_generation_ai(1e12, 2020, p), 2.0e6);
  EXPECT_EQ(pp_generation_ai(1e12, 2019.5, p), 0.0);
  p.fioai = 0;
  for (double t : {1900.0, 2020.0, 2100.0}) EXPECT_EQ(pp_generation_ai(1e12, t, p), 0.0);
}

TEST(Augment, NullAllocationIsBitIdentical) {
  const RunResult ai = integrate_run(augment_model(corpus(), sample_params(0.0)), {});
  for (const auto& [name, series] : bau().series) {
    ASSERT_TRUE(ai.has(name)) << name;
    EXPECT_EQ(ai.at(name), series) << name;
  }
}

TEST(Augment, AddsElevenElementsAndChangesOnlyTheGenerationRate) {
  const ModelSpec aug = augment_model(corpus(), sample_params());
  EXPECT_EQ(aug.size(), corpus().size() + 11);
  std::size_t changed = 0;
  for (const auto& [name, e] : corpus().elements()) {
    if (!(aug.at(name) == e)) {
      ++changed;
      EXPECT_EQ(name, world3::kPollutionGenerationRate);
    }
  }
  EXPECT_EQ(changed, 1u);
  std::size_t constants = 0, auxiliaries = 0;
  for (const auto& [name, e] : aug.elements()) {
    if (corpus().contains(name)) continue;
    constants += e.kind() == ElementKind::Constant;
    auxiliaries += e.kind() == ElementKind::Auxiliary;
  }
  EXPECT_EQ(constants, 8u);
  EXPECT_EQ(auxiliaries, 3u);
  const Expression want = Expression::binary(
      '+', corpus().at(world3::kPollutionGenerationRate).as<AuxiliaryDef>().expr,
      Expression::variable(kPollutionGenerationAi));
  EXPECT_EQ(aug.at(world3::kPollutionGenerationRate).as<AuxiliaryDef>().expr, want);
}

TEST(Augment, MissingHookIsReported) {
  ModelSpec spec;
  spec.add(make_constant("industrial_output", 1));
  EXPECT_THROW(augment_model(build_dependency_graph(spec), sample_params()), MissingHook);
}

TEST(Augment, ModelCoefficientsMatchClosedForm) {
  const AiParams p = sample_params();
  const RunResult r = integrate_run(augment_model(corpus(), p), {});
  for (double t : {2000.0, 2020.0, 2035.5, 2070.0, 2100.0}) {
    const double io = r.value_at(world3::kIndustrialOutput, t);
    EXPECT_NEAR(r.value_at(kPollutionGenerationAi, t), pp_generation_ai(io, t, p),
                1e-12 * std::max(1.0, pp_generation_ai(io, t, p)))
        << t;
  }
}

TEST(Augment, FirstStepAtActivationAddsExactlyTheAiTerm) {
  const AiParams p = sample_params();
  const RunResult r = integrate_run(augment_model(corpus(), p), {});
  const std::size_t k = r.index_of(p.activation_year);
  const double expected = pp_generation_ai(bau().at(world3::kIndustrialOutput)[k], p.activation_year, p);
  const double diff = r.at(world3::kPollutionGenerationRate)[k] - bau().at(world3::kPollutionGenerationRate)[k];
  EXPECT_NEAR(diff, expected, 1e-9 * expected);
  EXPECT_EQ(r.at(world3::kPollutionGenerationRate)[k - 1], bau().at(world3::kPollutionGenerationRate)[k - 1]);
}

TEST(Augment, MoreAllocationNeverLowersPollution) {
  std::vector<double> prev = bau().at(world3::kPersistentPollution);
  for (double f : {0.01, 0.02, 0.05}) {
    const RunResult r = integrate_run(augment_model(corpus(), sample_params(f)), {});
    const auto& s = r.at(world3::kPersistentPollution);
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_GE(s[i], prev[i]) << "fioai " << f << " sample " << i;
    prev = s;
  }
}

TEST(Augment, InvalidParametersAreRejected) {
  AiParams p = sample_params();
  p.fioai = 1.5;
  EXPECT_THROW(augment_model(corpus(), p), InvalidConfig);
  p = sample_params();
  p.coeff_floor = -0.1;
  EXPECT_THROW(validate_ai_params(p), InvalidConfig);
  p = sample_params();
  p.activation_year = 2200;
  EXPECT_THROW(validate_ai_params(p), InvalidConfig);
}

TEST(Preset, FormatParseRoundTrip) {
  const AiParams p = sample_params();
  EXPECT_EQ(parse_ai_preset(format_ai_preset(p, {"note"})), p);
}

TEST(Preset, RejectsUnknownDuplicateAndMissingKeys) {
  const std::string good = format_ai_preset(sample_params());
  EXPECT_THROW(parse_ai_preset(good + "extra = 1\n"), FormatError);
  EXPECT_THROW(parse_ai_preset(good + "fioai = 0.1\n"), FormatError);
  EXPECT_THROW(parse_ai_preset("fioai = 0.1\n"), FormatError);
  EXPECT_THROW(parse_ai_preset("fioai 0.1\n"), FormatError);
}

TEST(Preset, ShippedPresetIsValid) {
  const AiParams p = default_ai_params();
  EXPECT_NO_THROW(validate_ai_params(p));
  EXPECT_EQ(p.activation_year, 2020.0);
  EXPECT_GT(p.carbon_coeff_initial + p.ewaste_coeff_initial, 0.0);
}
