#include <gtest/gtest.h>

#include "limits_sd/engine.hpp"
#include "limits_sd/model_format.hpp"

using namespace limits_sd;
using Kind = Expression::Kind;

TEST(Expression, MultiplicationBindsTighterThanAddition) {
  const Expression e = parse_expression("a + b*c");
  const Expression want = Expression::binary(
      '+', Expression::variable("a"),
      Expression::binary('*', Expression::variable("b"), Expression::variable("c")));
  EXPECT_EQ(e, want);
}

TEST(Expression, ActivationIdiomIsFourArgumentCall) {
  const Expression e = parse_expression("clip(1, 0, time, 2020)");
  ASSERT_EQ(e.kind, Kind::Call);
  EXPECT_EQ(e.name, "clip");
  ASSERT_EQ(e.args.size(), 4u);
  EXPECT_EQ(e.args[2], Expression::variable("time"));
  EXPECT_EQ(e.args[3], Expression::literal(2020));
}

TEST(Expression, DivisionByZeroParsesButFailsAtRunTime) {
  EXPECT_NO_THROW(parse_expression("1/(a-a)"));
  const ModelSpec spec = parse_model_text("const a = 3\naux b = 1/(a-a)\n");
  try {
    integrate_run(spec, {});
    FAIL() << "expected RuntimeEvalError";
  } catch (const RuntimeEvalError& e) {
    EXPECT_EQ(e.element(), "b");
    EXPECT_EQ(e.time(), 1900.0);
  }
}

TEST(Expression, PowerIsLeftAssociativeAndBindsTighterThanUnaryMinus) {
  EXPECT_EQ(parse_expression("a ^ b ^ c"),
            Expression::binary('^', Expression::binary('^', Expression::variable("a"), Expression::variable("b")),
                               Expression::variable("c")));
  EXPECT_EQ(parse_expression("a - b - c"),
            Expression::binary('-', Expression::binary('-', Expression::variable("a"), Expression::variable("b")),
                               Expression::variable("c")));
  EXPECT_EQ(parse_expression("-a ^ 2"),
            Expression::negate(Expression::binary('^', Expression::variable("a"), Expression::literal(2))));
  EXPECT_EQ(parse_expression("-2"), Expression::literal(-2));
}

TEST(Expression, PrinterRoundTripsThroughParser) {
  for (const char* text : {"a - (b - c)", "a / (b * c)", "(a + b) * c", "-(a + b)", "2 ^ (-1)", "a ^ (b ^ c)", "max(a, -b) - min(1, 2)",
                           "(-2) ^ 2", "a - -3", "lookup(tbl, time / 2)", "step(1, 1950) + exp(ln(2))"}) {
    const Expression e = parse_expression(text);
    EXPECT_EQ(parse_expression(to_string(e)), e) << text << " printed as " << to_string(e);
  }
}

TEST(Expression, RejectsMalformedInput) {
  for (const char* text : {"", "a +", "(a", "a b", "max(a)", "clip(1,2,3)", "nosuch(1)", "lookup(2, 1)", "1e", "a,"}) {
    EXPECT_THROW(parse_expression(text), SyntaxError) << text;
  }
}

TEST(Expression, SyntaxErrorReportsColumn) {
  try {
    parse_expression("a + * b");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.col(), 5u);
  }
}

TEST(Expression, DeepNestingIsRejectedNotOverflowed) {
  const std::string deep = std::string(5000, '(') + "1" + std::string(5000, ')');
  EXPECT_THROW(parse_expression(deep), SyntaxError);
}

TEST(Expression, ReferencesExcludeTimeAndBuiltins) {
  const References r = references_of(parse_expression("max(a, time) + lookup(t, b)"));
  EXPECT_TRUE(r.uses_time);
  EXPECT_EQ(r.values, (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(r.tables, (std::set<std::string>{"t"}));
}
