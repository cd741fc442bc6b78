#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>

#include "tooldrift/corpus.hpp"
#include "tooldrift/env.hpp"

using namespace tooldrift;

namespace {

// Minimal registry reproducing the deprecation example: LoadDB retired in
// favor of InitializeDatabase.
ToolRegistry with_deprecated_loaddb() {
  ToolRegistry r = builtin_registry();
  ApiSpec old = *r.find("LoadDB");
  ApiSpec next = old;
  next.name = "InitializeDatabase";
  next.params[0].name = "DatabaseName";
  old.replaced_by = next.name;
  r.apis[0] = next;
  r.bindings.erase("LoadDB");
  r.bindings["InitializeDatabase"] = {"load_db", ResponseFormat::sentence};
  r.deprecated["LoadDB"] = {old, render_kv(param_example(next))};
  return r;
}

}  // namespace

TEST(World, ConditionParsing) {
  auto c = parse_condition("Date<=2022-05-06");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->column, "Date");
  EXPECT_EQ(c->op, CompareOp::le);
  EXPECT_EQ(c->value, "2022-05-06");
  auto ne = parse_condition("Person != Amy");
  ASSERT_TRUE(ne);
  EXPECT_EQ(ne->op, CompareOp::ne);
  EXPECT_EQ(ne->value, "Amy");
  auto eq2 = parse_condition("A==1");
  ASSERT_TRUE(eq2);
  EXPECT_EQ(eq2->value, "1");
  EXPECT_FALSE(parse_condition("=x"));
  EXPECT_FALSE(parse_condition("A="));
  EXPECT_FALSE(parse_condition("A!1"));
}

TEST(World, NumericVersusTextComparison) {
  EXPECT_TRUE(compare_cell("190.8", CompareOp::gt, "190"));
  EXPECT_TRUE(compare_cell("-5", CompareOp::lt, "0"));
  EXPECT_TRUE(compare_cell("2022-05-03", CompareOp::lt, "2022-05-10"));
  EXPECT_TRUE(compare_cell("Amy", CompareOp::eq, "Amy"));
}

TEST(Invoke, LoadDBMatchesTheTranscriptObservation) {
  auto r = builtin_registry();
  auto obs = invoke(r, "LoadDB", KvMap{{"DBName", "coffee"}});
  EXPECT_EQ(obs.kind, ObservationKind::response);
  EXPECT_EQ(obs.text,
            "We have successfully loaded the coffee database, including the following columns: Date, Open, High, "
            "Low, Close, Volume, Currency.");
}

TEST(Invoke, WrongKeyIsAnInvocationError) {
  auto r = builtin_registry();
  auto obs = invoke(r, "LoadDB", KvMap{{"LoadDBName", "coffee"}});
  EXPECT_EQ(obs.kind, ObservationKind::invocation_error);
  EXPECT_EQ(obs.text,
            "Your action is filtered due to some error in content. Please assume all the actions are permitted in "
            "this environment and try again.");
}

TEST(Invoke, OtherInvocationErrors) {
  auto r = builtin_registry();
  EXPECT_EQ(invoke(r, "NoSuchTool", KvMap{{"DBName", "coffee"}}).kind, ObservationKind::invocation_error);
  EXPECT_EQ(invoke(r, "LoadDB", KvMap{{"DBName", "nope"}}).kind, ObservationKind::invocation_error);
  EXPECT_EQ(invoke(r, "LoadDB", KvMap{{"DBName", "coffee"}, {"Extra", "x"}}).kind, ObservationKind::invocation_error);
  EXPECT_EQ(invoke(r, "GetValue", KvMap{{"DBName", "coffee"}, {"Condition", "Date=1999-01-01"}, {"ColumnName", "Open"}})
                .kind,
            ObservationKind::invocation_error);
  EXPECT_EQ(invoke(r, "FilterDB", KvMap{{"DBName", "coffee"}, {"Condition", "Nope=1"}}).kind,
            ObservationKind::invocation_error);
  EXPECT_EQ(invoke(r, "Calculate", KvMap{{"Formula", "1/0"}}).kind, ObservationKind::invocation_error);
  EXPECT_EQ(invoke(r, "Finish", KvMap{{"answer", "1"}}).kind, ObservationKind::invocation_error);
}

TEST(Invoke, FilterAndGet) {
  auto r = builtin_registry();
  EXPECT_EQ(invoke(r, "FilterDB", KvMap{{"DBName", "agenda"}, {"Condition", "Person=Amy, Date=2022-05-03"}}).text,
            "We have successfully filtered the data (2 rows).");
  EXPECT_EQ(invoke(r, "FilterDB", KvMap{{"DBName", "agenda"}, {"Condition", "Event=Book Club"}}).text,
            "We have successfully filtered the data (1 row).");
  EXPECT_EQ(invoke(r, "GetValue", KvMap{{"DBName", "coffee"}, {"Condition", "Date=2012-03-08"}, {"ColumnName", "Open"}})
                .text,
            "189.7");
  EXPECT_EQ(invoke(r, "Calculate", KvMap{{"Formula", "round((189.35-189.7)/189.7*100, 2)"}}).text, "-0.18");
}

TEST(Invoke, DeprecationMessageReproducesTheTemplate) {
  auto r = with_deprecated_loaddb();
  auto obs = invoke(r, "LoadDB", KvMap{{"DBName", "coffee"}});
  EXPECT_EQ(obs.kind, ObservationKind::deprecation_error);
  EXPECT_EQ(obs.text,
            "Error: LoadDB[DBName] is deprecated. Please use InitializeDatabase[DatabaseName], param example: "
            "{\"DatabaseName\": \"flights\"} instead.");
  // Deprecation is reported even when the arguments are wrong.
  EXPECT_EQ(invoke(r, "LoadDB", KvMap{{"Bad", "x"}}).kind, ObservationKind::deprecation_error);
  EXPECT_EQ(invoke(r, "InitializeDatabase", KvMap{{"DatabaseName", "coffee"}}).kind, ObservationKind::response);
}

TEST(Invoke, MapConditionsAreAccepted) {
  auto r = builtin_registry();
  r.find("FilterDB")->params[1].kind = ValueKind::map;
  auto obs = invoke(r, "FilterDB",
                    KvMap{{"DBName", "agenda"}, {"Condition", KvMap{{"condition1", "Person=Amy"}, {"condition2", "Date=2022-05-03"}}}});
  EXPECT_EQ(obs.text, "We have successfully filtered the data (2 rows).");
  EXPECT_EQ(invoke(r, "FilterDB", KvMap{{"DBName", "agenda"}, {"Condition", "Person=Amy"}}).kind,
            ObservationKind::invocation_error);
}

TEST(ResponseFormats, SamePayloadThreeRenderings) {
  Json payload = {{"database", "coffee"}, {"count", 4}};
  EXPECT_EQ(format_response(ResponseFormat::sentence, "filter_db", payload),
            "We have successfully filtered the data (4 rows).");
  EXPECT_EQ(format_response(ResponseFormat::json, "filter_db", payload), R"({"count":4,"database":"coffee"})");
  EXPECT_EQ(format_response(ResponseFormat::labeled, "filter_db", payload), "count: 4; database: coffee");
}

TEST(Evaluate, ScoresAnswers) {
  TaskInstance t{"t", "q", "-0.18", "coffee", Difficulty::hard};
  auto good = evaluate(t, "-0.180");
  EXPECT_EQ(good.kind, ObservationKind::task_done);
  EXPECT_EQ(good.text, "Answer is CORRECT");
  EXPECT_EQ(good.reward, 1);
  auto bad = evaluate(t, "0.18");
  EXPECT_EQ(bad.text, "Answer is INCORRECT");
  EXPECT_EQ(bad.reward, -1);
  TaskInstance s{"s", "q", "City Library", "agenda", Difficulty::easy};
  EXPECT_EQ(evaluate(s, " city library ").reward, 1);
}

TEST(Registry, BuiltinIsValidAndHasTheSixTools) {
  auto r = builtin_registry();
  EXPECT_TRUE(validate_registry(r).empty());
  std::vector<std::string> names;
  for (const auto& a : r.apis) names.push_back(a.name);
  EXPECT_EQ(names, (std::vector<std::string>{"LoadDB", "FilterDB", "GetValue", "Calculate", "Finish", "UpdateTool"}));
  EXPECT_TRUE(r.find("Finish")->is_system_tool);
  EXPECT_TRUE(r.find("UpdateTool")->is_system_tool);
  EXPECT_EQ(r.find("UpdateTool")->params.at(0).name, "newtool_desc");
  EXPECT_EQ(signature(*r.find("LoadDB")), "LoadDB[DBName]");
}

TEST(Registry, ValidationCatchesBrokenContracts) {
  auto r = with_deprecated_loaddb();
  EXPECT_TRUE(validate_registry(r).empty());
  r.deprecated["LoadDB"].api.replaced_by = "Missing";
  EXPECT_FALSE(validate_registry(r).empty());
  auto s = builtin_registry();
  s.find("Finish")->replaced_by = "X";
  EXPECT_FALSE(validate_registry(s).empty());
}

TEST(Registry, SerializationRoundTrips) {
  auto r = with_deprecated_loaddb();
  auto text = serialize_registry(r);
  auto back = parse_registry(text);
  EXPECT_EQ(back.apis, r.apis);
  EXPECT_EQ(back.bindings, r.bindings);
  EXPECT_EQ(back.deprecated, r.deprecated);
  EXPECT_EQ(serialize_registry(back), text);
}

TEST(Registry, SerializationUsesTheContractFieldNames) {
  auto j = OrderedJson::parse(serialize_registry(builtin_registry()));
  const auto& api = j["apis"][0];
  for (const char* f : {"name", "params", "description", "response_note", "replaced_by", "is_system_tool"}) {
    EXPECT_TRUE(api.contains(f)) << f;
  }
  for (const char* f : {"param_name", "value_kind", "example"}) EXPECT_TRUE(api["params"][0].contains(f)) << f;
}

TEST(Registry, ParseErrorsAreFormatErrors) {
  EXPECT_THROW(parse_registry("{not json"), FormatError);
  EXPECT_THROW(parse_registry("{}"), FormatError);
  EXPECT_THROW(parse_registry(R"({"generation": "x", "world": "elsewhere", "apis": [], "bindings": {}, "deprecated": {}})"),
               FormatError);
}

TEST(Tasks, SerializationRoundTripsAndRejectsDuplicates) {
  auto tasks = builtin_tasks();
  EXPECT_EQ(parse_tasks(serialize_tasks(tasks)), tasks);
  auto dup = tasks;
  dup.push_back(tasks[0]);
  EXPECT_THROW(parse_tasks(serialize_tasks(dup)), FormatError);
}

// Gold answers recomputed straight from the tables, without the behaviors
// or the formula evaluator.
TEST(Corpus, GoldAnswersMatchADirectTableOracle) {
  auto world = builtin_world();
  auto rows = [&](const std::string& table, const std::function<bool(const std::map<std::string, std::string>&)>& pred) {
    const Table& t = world->tables.at(table);
    std::vector<std::map<std::string, std::string>> out;
    for (const auto& r : t.rows) {
      std::map<std::string, std::string> m;
      for (std::size_t i = 0; i < t.columns.size(); ++i) m[t.columns[i]] = r[i];
      if (pred(m)) out.push_back(m);
    }
    return out;
  };
  auto num = [](const std::string& s) { return std::stod(s); };
  auto one = [&](const std::string& table, const std::function<bool(const std::map<std::string, std::string>&)>& p,
                 const std::string& col) {
    auto r = rows(table, p);
    EXPECT_EQ(r.size(), 1u) << table << " " << col;
    return r.empty() ? std::string() : r[0].at(col);
  };
  using Row = std::map<std::string, std::string>;
  auto round_to = [](double v, int d) { double s = std::pow(10.0, d); return std::round(v * s) / s; };
  auto coffee_on = [](const std::string& d) { return [d](const Row& r) { return r.at("Date") == d; }; };
  auto delta_atl = [](const std::string& dest) {
    return [dest](const Row& r) {
      return r.at("FlightDate") == "2022-01-03" && r.at("Airline") == "Delta" && r.at("Origin") == "ATL" &&
             r.at("Dest") == dest;
    };
  };

  std::map<std::string, std::string> oracle;
  oracle["coffee-easy-1"] = one("coffee", coffee_on("2012-03-08"), "Open");
  oracle["coffee-easy-2"] = one("coffee", coffee_on("2012-03-13"), "Close");
  oracle["coffee-easy-3"] = one("coffee", coffee_on("2012-03-01"), "High");
  oracle["coffee-easy-4"] = one("coffee", coffee_on("2012-03-06"), "Volume");
  {
    double o = num(one("coffee", coffee_on("2012-03-08"), "Open"));
    double c = num(one("coffee", coffee_on("2012-03-08"), "Close"));
    oracle["coffee-hard-1"] = std::to_string(round_to((c - o) / o * 100, 2));
    double h = num(one("coffee", coffee_on("2012-03-14"), "High"));
    double l = num(one("coffee", coffee_on("2012-03-14"), "Low"));
    oracle["coffee-hard-2"] = std::to_string(round_to(h - l, 2));
    oracle["coffee-hard-3"] = std::to_string(
        rows("coffee", [&](const Row& r) { return r.at("Date") <= "2012-03-09" && num(r.at("Close")) > 190; }).size());
    double a = num(one("coffee", coffee_on("2012-03-12"), "Close"));
    double b = num(one("coffee", coffee_on("2012-03-13"), "Close"));
    oracle["coffee-hard-4"] = std::to_string(round_to((a + b) / 2, 2));
  }
  oracle["flights-easy-1"] = one("flights", delta_atl("LAX"), "DepDelay");
  oracle["flights-easy-2"] = one("flights",
                                 [](const Row& r) {
                                   return r.at("Airline") == "American" && r.at("Origin") == "JFK" && r.at("Dest") == "LAX";
                                 },
                                 "Distance");
  oracle["flights-easy-3"] = one("flights",
                                 [](const Row& r) {
                                   return r.at("FlightDate") == "2022-01-03" && r.at("Airline") == "United" &&
                                          r.at("Origin") == "ATL";
                                 },
                                 "DepTime");
  oracle["flights-easy-4"] = std::to_string(
      rows("flights", [](const Row& r) { return r.at("FlightDate") == "2022-01-03" && r.at("Origin") == "ATL"; }).size());
  oracle["flights-hard-1"] = std::to_string(
      std::fabs(num(one("flights", delta_atl("LAX"), "CRSDepTime")) - num(one("flights", delta_atl("LAX"), "DepTime"))));
  oracle["flights-hard-2"] = std::to_string(num(one("flights", delta_atl("LAX"), "Distance")) +
                                            num(one("flights", delta_atl("JFK"), "Distance")));
  oracle["flights-hard-3"] = std::to_string(
      rows("flights", [&](const Row& r) { return r.at("FlightDate") == "2022-01-04" && num(r.at("DepDelay")) > 10; })
          .size());
  {
    auto jfk = [&](const std::string& airline) {
      return num(one("flights", [airline](const Row& r) { return r.at("Origin") == "JFK" && r.at("Airline") == airline; },
                     "DepDelay"));
    };
    oracle["flights-hard-4"] = std::to_string(round_to((jfk("American") + jfk("Delta")) / 2, 1));
  }
  oracle["agenda-easy-1"] = one("agenda",
                                [](const Row& r) {
                                  return r.at("Event") == "Yoga Class" && r.at("Person") == "Dennis" &&
                                         r.at("Date") == "2022-05-03";
                                },
                                "StartTime");
  oracle["agenda-easy-2"] = one("agenda", [](const Row& r) { return r.at("Event") == "Book Club"; }, "Location");
  oracle["agenda-easy-3"] = one("agenda", [](const Row& r) { return r.at("Event") == "Lunch with Mentor"; }, "EndTime");
  auto count_person = [&](const std::string& p, const std::string& from, const std::string& to) {
    return rows("agenda", [&](const Row& r) { return r.at("Person") == p && r.at("Date") >= from && r.at("Date") <= to; })
        .size();
  };
  oracle["agenda-easy-4"] = std::to_string(count_person("Amy", "2022-05-03", "2022-05-03"));
  oracle["agenda-hard-1"] =
      std::to_string(count_person("Dennis", "2022-05-03", "2022-05-03") + count_person("Amy", "2022-05-03", "2022-05-03"));
  oracle["agenda-hard-2"] = std::to_string(count_person("Dennis", "2022-05-01", "2022-05-07"));
  oracle["agenda-hard-3"] = std::to_string(static_cast<long>(count_person("Amy", "2022-05-01", "2022-05-31")) -
                                           static_cast<long>(count_person("Chao Zhang", "2022-05-01", "2022-05-31")));
  oracle["agenda-hard-4"] = std::to_string(
      rows("agenda", [](const Row& r) { return r.at("Location") == "Community Center" && r.at("Date") > "2022-05-04"; })
          .size());

  auto tasks = builtin_tasks();
  ASSERT_GE(tasks.size(), 20u);
  for (const auto& t : tasks) {
    ASSERT_TRUE(oracle.count(t.id)) << t.id;
    EXPECT_TRUE(answers_match(oracle[t.id], t.gold_answer)) << t.id << ": oracle " << oracle[t.id] << " gold "
                                                            << t.gold_answer;
  }
}

TEST(Corpus, PlansStartWithLoadAndEndWithFinish) {
  auto plans = builtin_plans();
  for (const auto& t : builtin_tasks()) {
    const auto& plan = plans->at(t.id);
    ASSERT_GE(plan.size(), 2u);
    EXPECT_EQ(plan.front().tool, "LoadDB");
    EXPECT_EQ(plan.back().tool, "Finish");
  }
}
