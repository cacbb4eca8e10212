#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "limits_sd/model_format.hpp"
#include "limits_sd/world3.hpp"

using namespace limits_sd;

TEST(ModelFormat, EmptyDocumentHasNoElements) {
  const ModelSpec spec = parse_model_text("");
  EXPECT_EQ(spec.size(), 0u);
}

TEST(ModelFormat, SingleConstant) {
  const ModelSpec spec = parse_model_text("const fioai = 0.02");
  ASSERT_EQ(spec.size(), 1u);
  const Element& e = spec.at("fioai");
  EXPECT_EQ(e.kind(), ElementKind::Constant);
  EXPECT_EQ(e.as<ConstantDef>().value, 0.02);
  EXPECT_EQ(e.line, 1u);
}

TEST(ModelFormat, EmptySpecSerializesToHeaderOnly) {
  ModelSpec spec;
  spec.metadata.name = "empty";
  spec.metadata.version = "1";
  EXPECT_EQ(serialize_model(spec), "model \"empty\" version \"1\"\n");
}

TEST(ModelFormat, ConstantSurvivesRoundTripBitExactly) {
  const ModelSpec a = parse_model_text("const x = 0.1\n");
  const ModelSpec b = parse_model_text(serialize_model(a));
  EXPECT_EQ(b.at("x").as<ConstantDef>().value, 0.1);
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5e-9}) {
    ModelSpec s;
    s.add(make_constant("v", v));
    const ModelSpec back = parse_model_text(serialize_model(s));
    EXPECT_EQ(back.at("v").as<ConstantDef>().value, v);
  }
}

TEST(ModelFormat, CorpusParseSerializeParseIsAFixedPoint) {
  const ModelSpec first = parse_model_text(world3_corpus_text());
  const std::string canonical = serialize_model(first);
  const ModelSpec second = parse_model_text(canonical);
  EXPECT_EQ(second.elements(), first.elements());
  EXPECT_EQ(serialize_model(second), canonical);
}

TEST(ModelFormat, CanonicalTextIsByteIdenticalAfterRoundTrip) {
  const std::string text =
      "model \"m\" version \"2\"\n"
      "# a comment\n"
      "const a = 2 unit \"kg\" sector \"s\"\n"
      "aux b = a + 1 sector \"s\"\n"
      "stock c init 0 inflow b outflow 0 sector \"s\"\n"
      "table t (time) = [(1900,0),(2000,1)] sector \"s\"\n";
  EXPECT_EQ(serialize_model(parse_model_text(text)), text);
}

TEST(ModelFormat, EveryDeclarationCarriesItsLine) {
  const ModelSpec spec = parse_model_text(world3_corpus_text());
  for (const auto& [name, e] : spec.elements()) EXPECT_GT(e.line, 0u) << name;
}

TEST(ModelFormat, DuplicateNamesReportBothLines) {
  try {
    parse_model_text("const a = 1\n\nconst a = 2\n");
    FAIL();
  } catch (const DuplicateName& e) {
    EXPECT_EQ(e.name(), "a");
    EXPECT_EQ(e.lines(), (std::vector<std::size_t>{1, 3}));
  }
}

TEST(ModelFormat, UnresolvedReferenceNamesTheElement) {
  try {
    parse_model_text("aux a = missing + 1\n");
    FAIL();
  } catch (const UnresolvedReference& e) {
    EXPECT_EQ(e.name(), "missing");
    EXPECT_EQ(e.referenced_by(), "a");
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(ModelFormat, AlgebraicLoopIsRejected) {
  EXPECT_THROW(parse_model_text("aux a = b\naux b = a\n"), AlgebraicLoop);
}

TEST(ModelFormat, SyntaxErrorLocation) {
  try {
    parse_model_text("const a = 1\naux b = (a\n");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ModelFormat, BadTablesAreRejected) {
  EXPECT_THROW(parse_model_text("table t (time) = [(0,1)]\n"), SyntaxError);
  EXPECT_THROW(parse_model_text("table t (time) = [(1,1),(0,2)]\n"), SyntaxError);
}

TEST(ModelFormat, SmoothAndDelayDeclarations) {
  const ModelSpec spec = parse_model_text(
      "const x = 1\n"
      "smooth s input x time 2 init 0 sector \"a\"\n"
      "delay3 d input x time 3 sector \"a\"\n");
  EXPECT_EQ(spec.at("s").kind(), ElementKind::Smooth);
  EXPECT_EQ(spec.at("d").kind(), ElementKind::Delay3);
  EXPECT_EQ(spec.at("d").sector, "a");
  EXPECT_EQ(parse_model_text(serialize_model(spec)).elements(), spec.elements());
}

namespace {

// Every exception a parser may legitimately raise derives from Error.
void parse_or_reject(const std::string& text) {
  try {
    parse_model_text(text);
  } catch (const Error&) {
  }
}

}  // namespace

TEST(ModelFormat, TenThousandRandomByteStringsNeverCrash) {
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> len(0, 200);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 10000; ++i) {
    std::string s(static_cast<std::size_t>(len(rng)), '\0');
    for (char& c : s) c = static_cast<char>(byte(rng));
    ASSERT_NO_FATAL_FAILURE(parse_or_reject(s));
  }
}

TEST(ModelFormat, MutatedCorpusLinesNeverCrash) {
  const std::string corpus(world3_corpus_text());
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pos(0, corpus.size() - 1);
  const char alphabet[] = "()[],=+-*/^#\"\n ae0.9";
  std::uniform_int_distribution<std::size_t> pick(0, std::strlen(alphabet) - 1);
  for (int i = 0; i < 200; ++i) {
    std::string s = corpus;
    for (int k = 0; k < 5; ++k) s[pos(rng)] = alphabet[pick(rng)];
    ASSERT_NO_FATAL_FAILURE(parse_or_reject(s));
  }
}
