#include <gtest/gtest.h>

#include "tooldrift/calc.hpp"

using namespace tooldrift;

TEST(Formula, Arithmetic) {
  EXPECT_DOUBLE_EQ(*evaluate_formula("1+2*3"), 7.0);
  EXPECT_DOUBLE_EQ(*evaluate_formula("(1+2)*3"), 9.0);
  EXPECT_DOUBLE_EQ(*evaluate_formula("-4 + +2"), -2.0);
  EXPECT_DOUBLE_EQ(*evaluate_formula("10/4"), 2.5);
}

TEST(Formula, Functions) {
  EXPECT_DOUBLE_EQ(*evaluate_formula("round(2.345, 2)"), 2.35);
  EXPECT_DOUBLE_EQ(*evaluate_formula("round(2.5)"), 3.0);
  EXPECT_DOUBLE_EQ(*evaluate_formula("abs(-3)"), 3.0);
  EXPECT_DOUBLE_EQ(*evaluate_formula("min(3, 1, 2)"), 1.0);
  EXPECT_DOUBLE_EQ(*evaluate_formula("max(3, 1, 2)"), 3.0);
}

TEST(Formula, PercentageChangeFromTheCoffeeExample) {
  auto v = evaluate_formula("round((189.35-189.7)/189.7*100, 2)");
  ASSERT_TRUE(v);
  EXPECT_EQ(format_number(*v), "-0.18");
}

TEST(Formula, Rejections) {
  EXPECT_FALSE(evaluate_formula("1/0"));
  EXPECT_FALSE(evaluate_formula("1+"));
  EXPECT_FALSE(evaluate_formula("foo(1)"));
  EXPECT_FALSE(evaluate_formula("round(1, 0.5)"));
  EXPECT_FALSE(evaluate_formula("2 3"));
  EXPECT_FALSE(evaluate_formula(""));
}

TEST(FormatNumber, ShortestForm) {
  EXPECT_EQ(format_number(189.7), "189.7");
  EXPECT_EQ(format_number(2706), "2706");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(17.5), "17.5");
}
