#pragma once

// Built-in task corpus: the base tool registry over the embedded world, the
// question set with gold answers, the few-shot demos, and the per-task tool
// plans the scripted policies follow.

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tooldrift/env.hpp"
#include "tooldrift/kv.hpp"
#include "tooldrift/world.hpp"

namespace tooldrift {

/// One step of a task's tool plan, written against the base registry.
/// String arguments may reference earlier results as "{i}" (the value
/// extracted from plan step i).
struct PlanStep {
  std::string tool;
  KvMap args;
  /// Payload field whose value this step produces, or empty.
  std::string extract;
};

using TaskPlan = std::vector<PlanStep>;
using PlanBook = std::map<std::string, TaskPlan>;

struct Corpus {
  ToolRegistry registry;
  std::vector<TaskInstance> tasks;
};

inline ToolRegistry builtin_registry() {
  ToolRegistry r;
  r.generation = "base";
  r.world = builtin_world();
  r.apis = {
      {"LoadDB",
       {{"DBName", ValueKind::text, "flights"}},
       "loads the database named DBName and lists its columns. DBName is one of: agenda, coffee, flights",
       response_note_for(ResponseFormat::sentence, "load_db"),
       std::nullopt,
       false},
      {"FilterDB",
       {{"DBName", ValueKind::text, "agenda"}, {"Condition", ValueKind::text, "Person=Chao Zhang, Date<=2022-05-06"}},
       "filters the rows of database DBName by Condition, a comma-separated list of Column<op>Value terms "
       "(op is one of =, !=, <, <=, >, >=), and counts the matching rows",
       response_note_for(ResponseFormat::sentence, "filter_db"),
       std::nullopt,
       false},
      {"GetValue",
       {{"DBName", ValueKind::text, "coffee"},
        {"Condition", ValueKind::text, "Date=2012-03-05"},
        {"ColumnName", ValueKind::text, "Close"}},
       "returns the ColumnName values of the rows in database DBName that satisfy Condition (same syntax as "
       "FilterDB)",
       response_note_for(ResponseFormat::sentence, "get_value"),
       std::nullopt,
       false},
      {"Calculate",
       {{"Formula", ValueKind::text, "round((189.35-189.7)/189.7*100, 2)"}},
       "evaluates the arithmetic Formula (+, -, *, /, parentheses, round, abs, min, max)",
       response_note_for(ResponseFormat::sentence, "calculate"),
       std::nullopt,
       false},
      {"Finish",
       {{"answer", ValueKind::text, "5"}},
       "returns the final answer and finishes the task",
       "",
       std::nullopt,
       true},
      {"UpdateTool",
       {{"newtool_desc", ValueKind::text,
         "NewTool[Param], which is an updated version of OldTool. For example, {\"Param\": \"value\"}."}},
       "adds the description newtool_desc of a newly discovered tool to the tool descriptions",
       "",
       std::nullopt,
       true},
  };
  r.bindings = {
      {"LoadDB", {"load_db", ResponseFormat::sentence}},
      {"FilterDB", {"filter_db", ResponseFormat::sentence}},
      {"GetValue", {"get_value", ResponseFormat::sentence}},
      {"Calculate", {"calculate", ResponseFormat::sentence}},
  };
  return r;
}

namespace detail {

struct TaskDef {
  TaskInstance task;
  TaskPlan plan;
};

inline PlanStep load(const char* db) { return {"LoadDB", KvMap{{"DBName", db}}, ""}; }
inline PlanStep filter(const char* db, const char* cond) {
  return {"FilterDB", KvMap{{"DBName", db}, {"Condition", cond}}, "count"};
}
inline PlanStep get(const char* db, const char* cond, const char* col) {
  return {"GetValue", KvMap{{"DBName", db}, {"Condition", cond}, {"ColumnName", col}}, "values"};
}
inline PlanStep calc(const char* formula) { return {"Calculate", KvMap{{"Formula", formula}}, "result"}; }
inline PlanStep finish(const char* ref) { return {"Finish", KvMap{{"answer", ref}}, ""}; }

inline const std::vector<TaskDef>& task_defs() {
  using D = Difficulty;
  static const std::vector<TaskDef> defs = {
      {{"coffee-easy-1", "What was the opening price of coffee on 2012-03-08?", "189.7", "coffee", D::easy},
       {load("coffee"), get("coffee", "Date=2012-03-08", "Open"), finish("{1}")}},
      {{"coffee-easy-2", "What was the closing price of coffee on 2012-03-13?", "188.75", "coffee", D::easy},
       {load("coffee"), get("coffee", "Date=2012-03-13", "Close"), finish("{1}")}},
      {{"coffee-easy-3", "What was the highest price of coffee on 2012-03-01?", "199.45", "coffee", D::easy},
       {load("coffee"), get("coffee", "Date=2012-03-01", "High"), finish("{1}")}},
      {{"coffee-easy-4", "What was the trading volume of coffee on 2012-03-06?", "15880", "coffee", D::easy},
       {load("coffee"), get("coffee", "Date=2012-03-06", "Volume"), finish("{1}")}},
      {{"coffee-hard-1",
        "What was the percentage change of the coffee price from open to close on 2012-03-08, rounded to two "
        "decimals?",
        "-0.18", "coffee", D::hard},
       {load("coffee"), get("coffee", "Date=2012-03-08", "Open"), get("coffee", "Date=2012-03-08", "Close"),
        calc("round(({2}-{1})/{1}*100, 2)"), finish("{3}")}},
      {{"coffee-hard-2", "What was the coffee price range (high minus low) on 2012-03-14, rounded to two decimals?",
        "7.15", "coffee", D::hard},
       {load("coffee"), get("coffee", "Date=2012-03-14", "High"), get("coffee", "Date=2012-03-14", "Low"),
        calc("round({1}-{2}, 2)"), finish("{3}")}},
      {{"coffee-hard-3", "On how many trading days between 2012-03-01 and 2012-03-09 did coffee close above 190?",
        "4", "coffee", D::hard},
       {load("coffee"), filter("coffee", "Date>=2012-03-01, Date<=2012-03-09, Close>190"), finish("{1}")}},
      {{"coffee-hard-4",
        "What was the average closing price of coffee over 2012-03-12 and 2012-03-13, rounded to two decimals?",
        "188.05", "coffee", D::hard},
       {load("coffee"), get("coffee", "Date=2012-03-12", "Close"), get("coffee", "Date=2012-03-13", "Close"),
        calc("round(({1}+{2})/2, 2)"), finish("{3}")}},
      {{"flights-easy-1", "What was the departure delay in minutes of the Delta flight from ATL to LAX on 2022-01-03?",
        "-5", "flights", D::easy},
       {load("flights"), get("flights", "FlightDate=2022-01-03, Airline=Delta, Origin=ATL, Dest=LAX", "DepDelay"),
        finish("{1}")}},
      {{"flights-easy-2", "What is the distance in miles of the American flight from JFK to LAX?", "2475", "flights",
        D::easy},
       {load("flights"), get("flights", "Airline=American, Origin=JFK, Dest=LAX", "Distance"), finish("{1}")}},
      {{"flights-easy-3", "What was the actual departure time of the United flight from ATL to ORD on 2022-01-03?",
        "1455", "flights", D::easy},
       {load("flights"), get("flights", "FlightDate=2022-01-03, Airline=United, Origin=ATL, Dest=ORD", "DepTime"),
        finish("{1}")}},
      {{"flights-easy-4", "How many flights departed from ATL on 2022-01-03?", "3", "flights", D::easy},
       {load("flights"), filter("flights", "FlightDate=2022-01-03, Origin=ATL"), finish("{1}")}},
      {{"flights-hard-1",
        "By how many minutes did the actual departure of the Delta flight from ATL to LAX on 2022-01-03 differ from "
        "its scheduled departure?",
        "5", "flights", D::hard},
       {load("flights"),
        get("flights", "FlightDate=2022-01-03, Airline=Delta, Origin=ATL, Dest=LAX", "CRSDepTime"),
        get("flights", "FlightDate=2022-01-03, Airline=Delta, Origin=ATL, Dest=LAX", "DepTime"),
        calc("abs({1}-{2})"), finish("{3}")}},
      {{"flights-hard-2", "What is the total distance of the two Delta flights out of ATL on 2022-01-03?", "2706",
        "flights", D::hard},
       {load("flights"), get("flights", "FlightDate=2022-01-03, Airline=Delta, Origin=ATL, Dest=LAX", "Distance"),
        get("flights", "FlightDate=2022-01-03, Airline=Delta, Origin=ATL, Dest=JFK", "Distance"),
        calc("{1}+{2}"), finish("{3}")}},
      {{"flights-hard-3", "How many flights on 2022-01-04 departed more than 10 minutes late?", "2", "flights",
        D::hard},
       {load("flights"), filter("flights", "FlightDate=2022-01-04, DepDelay>10"), finish("{1}")}},
      {{"flights-hard-4",
        "What was the average departure delay of the American and Delta flights out of JFK, rounded to one "
        "decimal?",
        "17.5", "flights", D::hard},
       {load("flights"), get("flights", "Origin=JFK, Airline=American", "DepDelay"),
        get("flights", "Origin=JFK, Airline=Delta", "DepDelay"), calc("round(({1}+{2})/2, 1)"), finish("{3}")}},
      {{"agenda-easy-1", "What time does Dennis's Yoga Class start on 2022-05-03?", "09:00", "agenda", D::easy},
       {load("agenda"), get("agenda", "Event=Yoga Class, Person=Dennis, Date=2022-05-03", "StartTime"),
        finish("{1}")}},
      {{"agenda-easy-2", "Where is Amy's Book Club on 2022-05-03?", "City Library", "agenda", D::easy},
       {load("agenda"), get("agenda", "Event=Book Club, Person=Amy, Date=2022-05-03", "Location"), finish("{1}")}},
      {{"agenda-easy-3", "When does Chao Zhang's Lunch with Mentor end?", "13:00", "agenda", D::easy},
       {load("agenda"), get("agenda", "Event=Lunch with Mentor, Person=Chao Zhang", "EndTime"), finish("{1}")}},
      {{"agenda-easy-4", "How many events does Amy have on 2022-05-03?", "2", "agenda", D::easy},
       {load("agenda"), filter("agenda", "Person=Amy, Date=2022-05-03"), finish("{1}")}},
      {{"agenda-hard-1", "How many events do Dennis and Amy have in total on 2022-05-03?", "4", "agenda", D::hard},
       {load("agenda"), filter("agenda", "Person=Dennis, Date=2022-05-03"),
        filter("agenda", "Person=Amy, Date=2022-05-03"), calc("{1}+{2}"), finish("{3}")}},
      {{"agenda-hard-2", "How many events does Dennis have between 2022-05-01 and 2022-05-07?", "4", "agenda",
        D::hard},
       {load("agenda"), filter("agenda", "Person=Dennis, Date>=2022-05-01, Date<=2022-05-07"), finish("{1}")}},
      {{"agenda-hard-3", "How many more events does Amy have than Chao Zhang in May 2022?", "1", "agenda", D::hard},
       {load("agenda"), filter("agenda", "Person=Amy, Date>=2022-05-01, Date<=2022-05-31"),
        filter("agenda", "Person=Chao Zhang, Date>=2022-05-01, Date<=2022-05-31"), calc("{1}-{2}"),
        finish("{3}")}},
      {{"agenda-hard-4", "How many events take place at the Community Center after 2022-05-04?", "2", "agenda",
        D::hard},
       {load("agenda"), filter("agenda", "Location=Community Center, Date>2022-05-04"), finish("{1}")}},
  };
  return defs;
}

}  // namespace detail

inline std::vector<TaskInstance> builtin_tasks() {
  std::vector<TaskInstance> out;
  for (const auto& d : detail::task_defs()) out.push_back(d.task);
  return out;
}

inline std::shared_ptr<const PlanBook> builtin_plans() {
  static const std::shared_ptr<const PlanBook> book = [] {
    auto b = std::make_shared<PlanBook>();
    for (const auto& d : detail::task_defs()) (*b)[d.task.id] = d.plan;
    return std::shared_ptr<const PlanBook>(std::move(b));
  }();
  return book;
}

inline Corpus builtin_corpus() { return {builtin_registry(), builtin_tasks()}; }

/// Three worked examples in the step format. They use only the base tools
/// and say nothing about tools changing.
inline const std::vector<std::string>& builtin_demos() {
  static const std::vector<std::string> demos = {
      "Question: What was the lowest price of coffee on 2012-03-05?\n"
      "Thought: To answer this question, I should first load the database containing coffee price information.\n"
      "Action: LoadDB\n"
      "Action Input: {\"DBName\": \"coffee\"}\n"
      "Observation: We have successfully loaded the coffee database, including the following columns: Date, Open, "
      "High, Low, Close, Volume, Currency.\n"
      "Thought: The Low column of the row dated 2012-03-05 holds the lowest price.\n"
      "Action: GetValue\n"
      "Action Input: {\"DBName\": \"coffee\", \"Condition\": \"Date=2012-03-05\", \"ColumnName\": \"Low\"}\n"
      "Observation: 190.55\n"
      "Thought: The lowest price was 190.55.\n"
      "Action: Finish\n"
      "Action Input: {\"answer\": \"190.55\"}\n"
      "Observation: Answer is CORRECT\n",
      "Question: How many flights did United operate on 2022-01-03?\n"
      "Thought: I need the flights database.\n"
      "Action: LoadDB\n"
      "Action Input: {\"DBName\": \"flights\"}\n"
      "Observation: We have successfully loaded the flights database, including the following columns: "
      "FlightDate, Airline, Origin, Dest, CRSDepTime, DepTime, DepDelay, Distance.\n"
      "Thought: I can count the rows for United on that date.\n"
      "Action: FilterDB\n"
      "Action Input: {\"DBName\": \"flights\", \"Condition\": \"FlightDate=2022-01-03, Airline=United\"}\n"
      "Observation: We have successfully filtered the data (2 rows).\n"
      "Thought: There are 2 matching flights.\n"
      "Action: Finish\n"
      "Action Input: {\"answer\": \"2\"}\n"
      "Observation: Answer is CORRECT\n",
      "Question: How long in minutes is Amy's Piano Lesson on 2022-05-04?\n"
      "Thought: I should load the agenda database first.\n"
      "Action: LoadDB\n"
      "Action Input: {\"DBName\": \"agenda\"}\n"
      "Observation: We have successfully loaded the agenda database, including the following columns: Event, "
      "Person, Date, StartTime, EndTime, Location.\n"
      "Thought: I need the start time of the lesson.\n"
      "Action: GetValue\n"
      "Action Input: {\"DBName\": \"agenda\", \"Condition\": \"Event=Piano Lesson, Person=Amy\", \"ColumnName\": "
      "\"StartTime\"}\n"
      "Observation: 16:00\n"
      "Thought: Now the end time.\n"
      "Action: GetValue\n"
      "Action Input: {\"DBName\": \"agenda\", \"Condition\": \"Event=Piano Lesson, Person=Amy\", \"ColumnName\": "
      "\"EndTime\"}\n"
      "Observation: 17:00\n"
      "Thought: From 16:00 to 17:00 is 60 minutes.\n"
      "Action: Calculate\n"
      "Action Input: {\"Formula\": \"(17-16)*60\"}\n"
      "Observation: 60\n"
      "Thought: The lesson lasts 60 minutes.\n"
      "Action: Finish\n"
      "Action Input: {\"answer\": \"60\"}\n"
      "Observation: Answer is CORRECT\n",
  };
  return demos;
}

}  // namespace tooldrift
