#include <gtest/gtest.h>

#include "tooldrift/adapt.hpp"
#include "tooldrift/corpus.hpp"

using namespace tooldrift;

TEST(Classify, MessageTemplates) {
  EXPECT_EQ(classify_observation(kFilteredMessage), ObservationClass::invocation_error);
  EXPECT_EQ(classify_observation("Error: LoadDB[DBName] is deprecated. Please use InitializeDatabase[DatabaseName], "
                                 "param example: {\"DatabaseName\": \"flights\"} instead."),
            ObservationClass::deprecation_error);
  EXPECT_EQ(classify_observation("Answer is CORRECT"), ObservationClass::task_done);
  EXPECT_EQ(classify_observation("Answer is INCORRECT"), ObservationClass::task_done);
  EXPECT_EQ(classify_observation("We have successfully loaded the coffee database, including the following "
                                 "columns: Date, Open, High, Low, Close, Volume, Currency."),
            ObservationClass::ok);
  EXPECT_EQ(classify_observation(kToolUpdatedMessage), ObservationClass::ok);
}

TEST(Classify, AgreesWithTheEnvironmentKinds) {
  ToolRegistry reg = builtin_registry();
  std::vector<Observation> samples = {
      invoke(reg, "LoadDB", KvMap{{"DBName", "coffee"}}),
      invoke(reg, "LoadDB", KvMap{{"LoadDBName", "coffee"}}),
      invoke(reg, "NoSuchTool", KvMap::object()),
      evaluate(builtin_tasks()[0], "189.7"),
      evaluate(builtin_tasks()[0], "1"),
  };
  for (const auto& o : samples) EXPECT_EQ(classify_observation(o.text), classify(o)) << o.text;
  EXPECT_FALSE(is_error(ObservationClass::ok));
  EXPECT_TRUE(is_error(ObservationClass::invocation_error));
  EXPECT_TRUE(is_error(ObservationClass::deprecation_error));
  EXPECT_FALSE(is_error(ObservationClass::task_done));
}

TEST(UpdateTool, AppendsOnceAndReports) {
  StateRecord s{builtin_tasks()[0], {"A[x], does a."}, {}, {}};
  auto once = apply_update_tool(s, "B[y], does b.");
  EXPECT_EQ(once.observation.text, kToolUpdatedMessage);
  EXPECT_EQ(once.state.tool_manual, (std::vector<std::string>{"A[x], does a.", "B[y], does b."}));
  auto twice = apply_update_tool(once.state, "B[y], does b.");
  EXPECT_EQ(twice.state.tool_manual, once.state.tool_manual);
  EXPECT_EQ(twice.observation.text, kToolUpdatedMessage);
  auto blank = apply_update_tool(s, "  \n ");
  EXPECT_EQ(blank.observation.kind, ObservationKind::invocation_error);
  EXPECT_EQ(blank.state, s);
}

TEST(Gate, Table) {
  AdaptConfig full;
  AdaptConfig no_reflect{true, false};
  AdaptConfig no_update{false, true};
  EXPECT_EQ(reflection_gate(ObservationClass::ok, full), ExpansionMode::normal);
  EXPECT_EQ(reflection_gate(ObservationClass::invocation_error, full), ExpansionMode::reflective);
  EXPECT_EQ(reflection_gate(ObservationClass::deprecation_error, full), ExpansionMode::reflective);
  EXPECT_EQ(reflection_gate(ObservationClass::invocation_error, no_reflect), ExpansionMode::terminate);
  EXPECT_EQ(reflection_gate(ObservationClass::deprecation_error, no_reflect), ExpansionMode::reflective);
  EXPECT_EQ(reflection_gate(ObservationClass::ok, no_reflect), ExpansionMode::normal);
  EXPECT_EQ(reflection_gate(ObservationClass::invocation_error, no_update), ExpansionMode::reflective);
}
