#pragma once

// Simulated tool environment.
//
// A ToolRegistry is one deployed generation of APIs: their contracts
// (ApiSpec), the behavior each name is bound to, the names that were retired
// in favor of a successor, and the world the behaviors read from. invoke()
// answers a call with a response or a typed error Observation and never
// throws for bad input; evaluate() scores a final answer.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tooldrift/calc.hpp"
#include "tooldrift/kv.hpp"
#include "tooldrift/world.hpp"

namespace tooldrift {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline constexpr std::string_view kFilteredMessage =
    "Your action is filtered due to some error in content. Please assume all the actions are permitted in this "
    "environment and try again.";
inline constexpr std::string_view kToolUpdatedMessage = "The description for the new tool has been updated successfully.";
inline constexpr std::string_view kAnswerCorrect = "Answer is CORRECT";
inline constexpr std::string_view kAnswerIncorrect = "Answer is INCORRECT";

inline constexpr std::string_view kFinishTool = "Finish";
inline constexpr std::string_view kUpdateTool = "UpdateTool";

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Contracts

enum class ValueKind { text, map, number };

inline std::string_view to_string(ValueKind k) {
  switch (k) {
    case ValueKind::text: return "text";
    case ValueKind::map: return "key-value map";
    case ValueKind::number: return "number";
  }
  return "text";
}

inline ValueKind value_kind_from_string(std::string_view s) {
  if (s == "text") return ValueKind::text;
  if (s == "key-value map") return ValueKind::map;
  if (s == "number") return ValueKind::number;
  throw FormatError("unknown value_kind '" + std::string(s) + "'");
}

struct ApiParam {
  std::string name;
  ValueKind kind = ValueKind::text;
  /// Example value as text. For map-kind params this is the map's JSON text.
  std::string example;

  bool operator==(const ApiParam&) const = default;
};

struct ApiSpec {
  std::string name;
  std::vector<ApiParam> params;
  std::string description;
  std::string response_note;
  std::optional<std::string> replaced_by;
  bool is_system_tool = false;

  bool operator==(const ApiSpec&) const = default;
};

enum class ResponseFormat { sentence, json, labeled };

inline std::string_view to_string(ResponseFormat f) {
  switch (f) {
    case ResponseFormat::sentence: return "sentence";
    case ResponseFormat::json: return "json";
    case ResponseFormat::labeled: return "labeled";
  }
  return "sentence";
}

inline ResponseFormat response_format_from_string(std::string_view s) {
  if (s == "sentence") return ResponseFormat::sentence;
  if (s == "json") return ResponseFormat::json;
  if (s == "labeled") return ResponseFormat::labeled;
  throw FormatError("unknown response_format '" + std::string(s) + "'");
}

struct Binding {
  std::string behavior;
  ResponseFormat format = ResponseFormat::sentence;

  bool operator==(const Binding&) const = default;
};

/// A retired API. `api.replaced_by` names the successor; `param_example` is
/// the successor's example call as shown in the deprecation message.
struct Deprecation {
  ApiSpec api;
  std::string param_example;

  bool operator==(const Deprecation&) const = default;
};

struct ToolRegistry {
  std::string generation;
  std::vector<ApiSpec> apis;
  std::map<std::string, Binding> bindings;
  std::map<std::string, Deprecation> deprecated;
  std::shared_ptr<const World> world;

  const ApiSpec* find(std::string_view name) const {
    auto it = std::find_if(apis.begin(), apis.end(), [&](const ApiSpec& a) { return a.name == name; });
    return it == apis.end() ? nullptr : &*it;
  }
  ApiSpec* find(std::string_view name) {
    auto it = std::find_if(apis.begin(), apis.end(), [&](const ApiSpec& a) { return a.name == name; });
    return it == apis.end() ? nullptr : &*it;
  }
  const Binding* binding(std::string_view name) const {
    auto it = bindings.find(std::string(name));
    return it == bindings.end() ? nullptr : &it->second;
  }
};

// ---------------------------------------------------------------------------
// Observations and tasks

enum class ObservationKind { response, invocation_error, deprecation_error, task_done };

inline std::string_view to_string(ObservationKind k) {
  switch (k) {
    case ObservationKind::response: return "response";
    case ObservationKind::invocation_error: return "invocation_error";
    case ObservationKind::deprecation_error: return "deprecation_error";
    case ObservationKind::task_done: return "task_done";
  }
  return "response";
}

inline ObservationKind observation_kind_from_string(std::string_view s) {
  if (s == "response") return ObservationKind::response;
  if (s == "invocation_error") return ObservationKind::invocation_error;
  if (s == "deprecation_error") return ObservationKind::deprecation_error;
  if (s == "task_done") return ObservationKind::task_done;
  throw FormatError("unknown observation kind '" + std::string(s) + "'");
}

struct Observation {
  ObservationKind kind = ObservationKind::response;
  std::string text;
  std::optional<int> reward;  // set iff kind == task_done

  bool operator==(const Observation&) const = default;

  static Observation response(std::string text) { return {ObservationKind::response, std::move(text), std::nullopt}; }
  static Observation invocation_error() {
    return {ObservationKind::invocation_error, std::string(kFilteredMessage), std::nullopt};
  }
};

enum class Difficulty { easy, hard };

inline std::string_view to_string(Difficulty d) { return d == Difficulty::easy ? "easy" : "hard"; }

inline Difficulty difficulty_from_string(std::string_view s) {
  if (s == "easy") return Difficulty::easy;
  if (s == "hard") return Difficulty::hard;
  throw FormatError("unknown difficulty '" + std::string(s) + "'");
}

struct TaskInstance {
  std::string id;
  std::string description;
  std::string gold_answer;
  std::string dataset;
  Difficulty difficulty = Difficulty::easy;

  bool operator==(const TaskInstance&) const = default;
};

// ---------------------------------------------------------------------------
// Behaviors

enum class SlotKind { text, conditions };

struct BehaviorInfo {
  std::string_view id;
  std::vector<SlotKind> slots;
  /// Payload field the behavior's primary result lives in.
  std::string_view result_field;
};

inline const std::vector<BehaviorInfo>& behavior_catalog() {
  static const std::vector<BehaviorInfo> catalog = {
      {"load_db", {SlotKind::text}, "columns"},
      {"filter_db", {SlotKind::text, SlotKind::conditions}, "count"},
      {"get_value", {SlotKind::text, SlotKind::conditions, SlotKind::text}, "values"},
      {"calculate", {SlotKind::text}, "result"},
  };
  return catalog;
}

inline const BehaviorInfo* find_behavior(std::string_view id) {
  for (const auto& b : behavior_catalog())
    if (b.id == id) return &b;
  return nullptr;
}

struct SlotValue {
  std::string text;
  std::vector<Condition> conditions;
};

namespace detail {

inline std::optional<std::vector<Condition>> conditions_from_terms(const std::vector<std::string>& terms) {
  if (terms.empty()) return std::nullopt;
  std::vector<Condition> out;
  for (const auto& t : terms) {
    auto c = parse_condition(t);
    if (!c) return std::nullopt;
    out.push_back(std::move(*c));
  }
  return out;
}

inline std::optional<Json> run_behavior(const BehaviorInfo& info, const std::vector<SlotValue>& args,
                                        const World& world) {
  if (info.id == "calculate") {
    auto v = evaluate_formula(args[0].text);
    if (!v) return std::nullopt;
    return Json{{"result", format_number(*v)}};
  }
  const Table* table = world.find(args[0].text);
  if (!table) return std::nullopt;
  if (info.id == "load_db") {
    return Json{{"database", table->name}, {"columns", table->columns}};
  }
  auto rows = filter_rows(*table, args[1].conditions);
  if (!rows) return std::nullopt;
  if (info.id == "filter_db") {
    return Json{{"database", table->name}, {"count", rows->size()}};
  }
  if (info.id == "get_value") {
    auto col = table->column_index(args[2].text);
    if (!col || rows->empty()) return std::nullopt;
    Json values = Json::array();
    for (auto r : *rows) values.push_back(table->rows[r][*col]);
    return Json{{"column", table->columns[*col]}, {"values", values}};
  }
  return std::nullopt;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string field_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : v) parts.push_back(field_text(e));
    return join(parts, ", ");
  }
  return v.dump();
}

}  // namespace detail

/// Renders a behavior payload in the given response format.
inline std::string format_response(ResponseFormat format, std::string_view behavior, const Json& payload) {
  switch (format) {
    case ResponseFormat::json: return payload.dump();
    case ResponseFormat::labeled: {
      std::vector<std::string> parts;
      for (const auto& [k, v] : payload.items()) parts.push_back(k + ": " + detail::field_text(v));
      return detail::join(parts, "; ");
    }
    case ResponseFormat::sentence: break;
  }
  if (behavior == "load_db") {
    return "We have successfully loaded the " + payload["database"].get<std::string>() +
           " database, including the following columns: " + detail::field_text(payload["columns"]) + ".";
  }
  if (behavior == "filter_db") {
    auto n = payload["count"].get<std::size_t>();
    return "We have successfully filtered the data (" + std::to_string(n) + (n == 1 ? " row)." : " rows).");
  }
  if (behavior == "get_value") return detail::field_text(payload["values"]);
  if (behavior == "calculate") return payload["result"].get<std::string>();
  return payload.dump();
}

inline std::string response_note_for(ResponseFormat format, std::string_view behavior) {
  const BehaviorInfo* info = find_behavior(behavior);
  switch (format) {
    case ResponseFormat::json:
      return "Returns a JSON object; the result is in the \"" + std::string(info ? info->result_field : "result") +
             "\" field.";
    case ResponseFormat::labeled:
      return "Returns \"field: value\" pairs separated by semicolons; the result is in the \"" +
             std::string(info ? info->result_field : "result") + "\" field.";
    case ResponseFormat::sentence: break;
  }
  if (behavior == "load_db") return "Returns a sentence listing the columns of the database.";
  if (behavior == "filter_db") return "Returns a sentence with the number of matching rows.";
  if (behavior == "get_value") return "Returns the matching values as plain text, separated by commas.";
  if (behavior == "calculate") return "Returns the numeric result as plain text.";
  return {};
}

// ---------------------------------------------------------------------------
// Rendering of contracts

/// "LoadDB[DBName]"
inline std::string signature(const ApiSpec& api) {
  std::string out = api.name + "[";
  for (std::size_t i = 0; i < api.params.size(); ++i) {
    if (i) out += ", ";
    out += api.params[i].name;
  }
  return out + "]";
}

inline KvMap param_value_from_example(const ApiParam& p) {
  switch (p.kind) {
    case ValueKind::map:
      try {
        return parse_kv_map(p.example);
      } catch (const KvParseError&) {
        return p.example;
      }
    case ValueKind::number:
      if (auto n = parse_number(p.example)) {
        double v = *n;
        if (v == std::floor(v) && std::fabs(v) < 1e15) return static_cast<long long>(v);
        return v;
      }
      return p.example;
    case ValueKind::text: break;
  }
  return p.example;
}

inline KvMap param_example(const ApiSpec& api) {
  KvMap out = KvMap::object();
  for (const auto& p : api.params) out[p.name] = param_value_from_example(p);
  return out;
}

/// Tool-manual entry for an API, as shown in the prompt.
inline std::string describe_api(const ApiSpec& api) {
  std::string out = signature(api) + ", which " + api.description + ".";
  if (!api.response_note.empty()) out += " " + api.response_note;
  out += " Param example: " + render_kv(param_example(api));
  return out;
}

/// Prompt-side tool manual for a registry generation. UpdateTool is left out
/// when the tool-update mechanism is disabled.
inline std::vector<std::string> prompt_manual(const ToolRegistry& registry, bool include_update_tool = true) {
  std::vector<std::string> out;
  for (const auto& api : registry.apis) {
    if (!include_update_tool && api.name == kUpdateTool) continue;
    out.push_back(describe_api(api));
  }
  return out;
}

inline std::string deprecation_message(const ToolRegistry& registry, const Deprecation& dep) {
  std::string successor = dep.api.replaced_by.value_or("?");
  if (const ApiSpec* next = registry.find(successor)) successor = signature(*next);
  return "Error: " + signature(dep.api) + " is deprecated. Please use " + successor +
         ", param example: " + dep.param_example + " instead.";
}

// ---------------------------------------------------------------------------
// Invocation

namespace detail {

inline std::optional<SlotValue> slot_value(const ApiParam& param, SlotKind slot, const KvMap& value) {
  SlotValue out;
  switch (param.kind) {
    case ValueKind::text:
      if (!value.is_string()) return std::nullopt;
      out.text = value.get<std::string>();
      break;
    case ValueKind::number:
      if (value.is_number()) {
        out.text = value.dump();
      } else if (value.is_string() && parse_number(value.get<std::string>())) {
        out.text = std::string(trim(value.get<std::string>()));
      } else {
        return std::nullopt;
      }
      break;
    case ValueKind::map: {
      if (!value.is_object() || value.empty()) return std::nullopt;
      std::vector<std::string> terms;
      for (const auto& [k, v] : value.items()) {
        if (!v.is_string()) return std::nullopt;
        for (auto& t : split_condition_terms(v.get<std::string>())) terms.push_back(std::move(t));
      }
      if (slot != SlotKind::conditions) return std::nullopt;
      auto conds = conditions_from_terms(terms);
      if (!conds) return std::nullopt;
      out.conditions = std::move(*conds);
      return out;
    }
  }
  if (slot == SlotKind::conditions) {
    auto conds = conditions_from_terms(split_condition_terms(out.text));
    if (!conds) return std::nullopt;
    out.conditions = std::move(*conds);
  }
  return out;
}

}  // namespace detail

/// Successful call result: the behavior's structured payload and its
/// rendered text.
struct CallResult {
  Json payload;
  std::string text;
};

/// Executes a call and returns either the structured result or the error
/// Observation the environment would report.
inline std::variant<CallResult, Observation> execute(const ToolRegistry& registry, std::string_view name,
                                                     const KvMap& args) {
  if (auto dep = registry.deprecated.find(std::string(name)); dep != registry.deprecated.end()) {
    return Observation{ObservationKind::deprecation_error, deprecation_message(registry, dep->second), std::nullopt};
  }
  const ApiSpec* api = registry.find(name);
  const Binding* binding = registry.binding(name);
  const BehaviorInfo* info = binding ? find_behavior(binding->behavior) : nullptr;
  if (!api || api->is_system_tool || !info || !registry.world) return Observation::invocation_error();
  if (!args.is_object() || args.size() != api->params.size() || info->slots.size() != api->params.size()) {
    return Observation::invocation_error();
  }
  std::vector<SlotValue> slots;
  for (std::size_t i = 0; i < api->params.size(); ++i) {
    const auto& p = api->params[i];
    auto it = args.find(p.name);
    if (it == args.end()) return Observation::invocation_error();
    auto v = detail::slot_value(p, info->slots[i], *it);
    if (!v) return Observation::invocation_error();
    slots.push_back(std::move(*v));
  }
  auto payload = detail::run_behavior(*info, slots, *registry.world);
  if (!payload) return Observation::invocation_error();
  std::string text = format_response(binding->format, binding->behavior, *payload);
  return CallResult{std::move(*payload), std::move(text)};
}

inline Observation invoke(const ToolRegistry& registry, std::string_view name, const KvMap& args) {
  auto r = execute(registry, name, args);
  if (auto* ok = std::get_if<CallResult>(&r)) return Observation::response(std::move(ok->text));
  return std::get<Observation>(std::move(r));
}

// ---------------------------------------------------------------------------
// Scoring

inline std::string normalize_answer(std::string_view s) {
  std::string out(trim(s));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool answers_match(std::string_view answer, std::string_view gold) {
  auto a = parse_number(answer);
  auto g = parse_number(gold);
  if (a && g) return std::fabs(*a - *g) <= 1e-9;
  return normalize_answer(answer) == normalize_answer(gold);
}

inline Observation evaluate(const TaskInstance& task, std::string_view answer) {
  bool ok = answers_match(answer, task.gold_answer);
  return Observation{ObservationKind::task_done, std::string(ok ? kAnswerCorrect : kAnswerIncorrect), ok ? 1 : -1};
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> validate_registry(const ToolRegistry& registry) {
  std::vector<std::string> issues;
  std::set<std::string> names;
  for (const auto& api : registry.apis) {
    if (api.name.empty()) issues.push_back("api with empty name");
    if (!names.insert(api.name).second) issues.push_back("duplicate api '" + api.name + "'");
    if (api.is_system_tool) {
      if (api.replaced_by) issues.push_back("system tool '" + api.name + "' carries replaced_by");
      continue;
    }
    const Binding* b = registry.binding(api.name);
    const BehaviorInfo* info = b ? find_behavior(b->behavior) : nullptr;
    if (!info) {
      issues.push_back("api '" + api.name + "' has no behavior");
      continue;
    }
    if (info->slots.size() != api.params.size()) {
      issues.push_back("api '" + api.name + "' parameter count does not match behavior '" + b->behavior + "'");
      continue;
    }
    for (std::size_t i = 0; i < api.params.size(); ++i) {
      if (api.params[i].kind == ValueKind::map && info->slots[i] != SlotKind::conditions) {
        issues.push_back("api '" + api.name + "' param '" + api.params[i].name + "' cannot take a key-value map");
      }
    }
  }
  for (const auto& [old, dep] : registry.deprecated) {
    if (names.count(old)) issues.push_back("deprecated name '" + old + "' is still deployed");
    if (dep.api.name != old) issues.push_back("deprecated entry '" + old + "' describes '" + dep.api.name + "'");
    if (!dep.api.replaced_by) {
      issues.push_back("deprecated '" + old + "' has no successor");
    } else if (!names.count(*dep.api.replaced_by)) {
      issues.push_back("deprecated '" + old + "' points at missing successor '" + *dep.api.replaced_by + "'");
    }
    if (dep.api.is_system_tool) issues.push_back("system tool '" + old + "' is deprecated");
  }
  if (!registry.world) issues.push_back("registry has no world");
  return issues;
}

// ---------------------------------------------------------------------------
// Serialization

inline OrderedJson to_json(const ApiSpec& api) {
  OrderedJson params = OrderedJson::array();
  for (const auto& p : api.params) {
    params.push_back({{"param_name", p.name}, {"value_kind", to_string(p.kind)}, {"example", p.example}});
  }
  OrderedJson j;
  j["name"] = api.name;
  j["params"] = std::move(params);
  j["description"] = api.description;
  j["response_note"] = api.response_note;
  j["replaced_by"] = api.replaced_by ? OrderedJson(*api.replaced_by) : OrderedJson(nullptr);
  j["is_system_tool"] = api.is_system_tool;
  return j;
}

namespace detail {

template <typename J>
const J& require(const J& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename J>
std::string require_string(const J& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
  return v.template get<std::string>();
}

}  // namespace detail

template <typename J>
ApiSpec api_from_json(const J& j) {
  ApiSpec api;
  api.name = detail::require_string(j, "name");
  for (const auto& p : detail::require(j, "params")) {
    api.params.push_back({detail::require_string(p, "param_name"),
                          value_kind_from_string(detail::require_string(p, "value_kind")),
                          detail::require_string(p, "example")});
  }
  api.description = detail::require_string(j, "description");
  api.response_note = detail::require_string(j, "response_note");
  const auto& rb = detail::require(j, "replaced_by");
  if (!rb.is_null()) api.replaced_by = rb.template get<std::string>();
  api.is_system_tool = detail::require(j, "is_system_tool").template get<bool>();
  return api;
}

inline std::shared_ptr<const World> resolve_world(std::string_view version) {
  auto w = builtin_world();
  if (version != w->version) throw FormatError("unknown world '" + std::string(version) + "'");
  return w;
}

inline OrderedJson to_json(const ToolRegistry& registry) {
  OrderedJson j;
  j["schema"] = "tooldrift.registry/v1";
  j["generation"] = registry.generation;
  j["world"] = registry.world ? registry.world->version : std::string();
  OrderedJson apis = OrderedJson::array();
  for (const auto& a : registry.apis) apis.push_back(to_json(a));
  j["apis"] = std::move(apis);
  OrderedJson bindings = OrderedJson::object();
  for (const auto& [name, b] : registry.bindings) {
    bindings[name] = {{"behavior", b.behavior}, {"response_format", to_string(b.format)}};
  }
  j["bindings"] = std::move(bindings);
  OrderedJson deprecated = OrderedJson::object();
  for (const auto& [name, d] : registry.deprecated) {
    deprecated[name] = {{"api", to_json(d.api)}, {"param_example", d.param_example}};
  }
  j["deprecated"] = std::move(deprecated);
  return j;
}

template <typename J>
ToolRegistry registry_from_json(const J& j) {
  if (!j.is_object()) throw FormatError("registry document must be an object");
  ToolRegistry r;
  r.generation = detail::require_string(j, "generation");
  r.world = resolve_world(detail::require_string(j, "world"));
  for (const auto& a : detail::require(j, "apis")) r.apis.push_back(api_from_json(a));
  for (const auto& [name, b] : detail::require(j, "bindings").items()) {
    r.bindings[name] = Binding{detail::require_string(b, "behavior"),
                               response_format_from_string(detail::require_string(b, "response_format"))};
  }
  for (const auto& [name, d] : detail::require(j, "deprecated").items()) {
    r.deprecated[name] = Deprecation{api_from_json(detail::require(d, "api")), detail::require_string(d, "param_example")};
  }
  return r;
}

inline std::string serialize_registry(const ToolRegistry& registry) { return to_json(registry).dump(2) + "\n"; }

inline ToolRegistry parse_registry(std::string_view text) {
  OrderedJson j;
  try {
    j = OrderedJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("registry is not valid JSON: ") + e.what());
  }
  try {
    return registry_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed registry: ") + e.what());
  }
}

inline OrderedJson to_json(const TaskInstance& t) {
  OrderedJson j;
  j["id"] = t.id;
  j["description"] = t.description;
  j["gold_answer"] = t.gold_answer;
  j["dataset"] = t.dataset;
  j["difficulty"] = to_string(t.difficulty);
  return j;
}

template <typename J>
TaskInstance task_from_json(const J& j) {
  TaskInstance t;
  t.id = detail::require_string(j, "id");
  t.description = detail::require_string(j, "description");
  t.gold_answer = detail::require_string(j, "gold_answer");
  t.dataset = detail::require_string(j, "dataset");
  t.difficulty = difficulty_from_string(detail::require_string(j, "difficulty"));
  if (t.gold_answer.empty()) throw FormatError("task '" + t.id + "' has an empty gold_answer");
  return t;
}

inline std::string serialize_tasks(const std::vector<TaskInstance>& tasks) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& t : tasks) arr.push_back(to_json(t));
  return arr.dump(2) + "\n";
}

inline std::vector<TaskInstance> parse_tasks(std::string_view text) {
  OrderedJson j;
  try {
    j = OrderedJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("task corpus is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw FormatError("task corpus must be a JSON list");
  std::vector<TaskInstance> out;
  std::set<std::string> ids;
  try {
    for (const auto& t : j) {
      out.push_back(task_from_json(t));
      if (!ids.insert(out.back().id).second) throw FormatError("duplicate task id '" + out.back().id + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed task: ") + e.what());
  }
  return out;
}

inline OrderedJson to_json(const Observation& o) {
  OrderedJson j;
  j["kind"] = to_string(o.kind);
  j["text"] = o.text;
  j["reward"] = o.reward ? OrderedJson(*o.reward) : OrderedJson(nullptr);
  return j;
}

}  // namespace tooldrift
