#pragma once

// Action proposers.
//
// A Policy maps a state to k candidate step texts. ScriptedPolicy is a
// deterministic, table-driven stand-in for a language model: it follows the
// task's tool plan and reacts to the environment's feedback according to
// its mode.
//   adaptive       reads deprecation messages and updated manual entries,
//                  switches to the successor and records it with UpdateTool.
//   rigid          ignores both and repeats a rejected call unchanged.
//   semi_adaptive  adaptive, but its calls carry a wrong argument key until
//                  the path has seen one invocation error.

#include <cctype>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "tooldrift/adapt.hpp"
#include "tooldrift/corpus.hpp"
#include "tooldrift/env.hpp"
#include "tooldrift/mutation.hpp"
#include "tooldrift/react.hpp"

namespace tooldrift {

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// Exactly k candidate texts. Throws PolicyError when no candidates can be
  /// produced.
  virtual std::vector<std::string> propose(const StateRecord& state, int k) const = 0;
};

enum class ScriptMode { adaptive, rigid, semi_adaptive };

enum class PolicyKind { scripted_adaptive, scripted_rigid, scripted_semi_adaptive, remote };

inline std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::scripted_adaptive: return "scripted_adaptive";
    case PolicyKind::scripted_rigid: return "scripted_rigid";
    case PolicyKind::scripted_semi_adaptive: return "scripted_semi_adaptive";
    case PolicyKind::remote: return "remote";
  }
  return "scripted_adaptive";
}

inline PolicyKind policy_kind_from_string(std::string_view s) {
  for (auto k : {PolicyKind::scripted_adaptive, PolicyKind::scripted_rigid, PolicyKind::scripted_semi_adaptive,
                 PolicyKind::remote}) {
    if (to_string(k) == s) return k;
  }
  throw PolicyError("unknown policy kind '" + std::string(s) + "'");
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::scripted_adaptive;
  std::optional<std::string> endpoint;
  double temperature = 0.7;
  std::chrono::milliseconds request_timeout{30000};
  int max_candidates = 5;
  int max_in_flight = 4;
  int max_retries = 2;
};

inline void validate(const PolicyConfig& c) {
  if ((c.kind == PolicyKind::remote) != c.endpoint.has_value()) {
    throw PolicyError("an endpoint is required for the remote policy and only for it");
  }
  if (c.temperature < 0) throw PolicyError("temperature must be non-negative");
  if (c.max_candidates < 1 || c.max_in_flight < 1 || c.max_retries < 0) {
    throw PolicyError("max_candidates and max_in_flight must be positive, max_retries non-negative");
  }
  if (c.request_timeout.count() <= 0) throw PolicyError("request_timeout must be positive");
}

/// Usage of a successor tool as learned from feedback or the manual.
struct ToolUsage {
  std::string name;
  std::vector<ApiParam> params;  // kinds inferred from the example
  KvMap example = KvMap::object();
  std::string replaces;
};

/// Successor usage announced by a deprecation message, if it parses.
inline std::optional<ToolUsage> usage_from_deprecation(const std::string& text) {
  static const std::regex re(R"(Error: ([A-Za-z0-9_.\-]+)\[[^\]]*\] is deprecated\. Please use ([A-Za-z0-9_.\-]+)\[([^\]]*)\], param example: )");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nullopt;
  ToolUsage u;
  u.replaces = m[1];
  u.name = m[2];
  std::string tail = text.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
  try {
    u.example = parse_kv_map(tail);
  } catch (const KvParseError&) {
    return std::nullopt;
  }
  for (const auto& [key, value] : u.example.items()) {
    u.params.push_back({key, value.is_object() ? ValueKind::map : ValueKind::text, kv_text(value)});
  }
  return u;
}

/// Successor usage from a manual entry written by UpdateTool:
/// "New[P], which is an updated version of Old[...]. For example, {...}."
inline std::optional<ToolUsage> usage_from_manual_entry(const std::string& entry) {
  static const std::regex re(R"(^([A-Za-z0-9_.\-]+)\[([^\]]*)\], which is an updated version of ([A-Za-z0-9_.\-]+))");
  std::smatch m;
  if (!std::regex_search(entry, m, re)) return std::nullopt;
  auto at = entry.find("For example, ");
  if (at == std::string::npos) return std::nullopt;
  ToolUsage u;
  u.name = m[1];
  u.replaces = m[3];
  while (!u.replaces.empty() && is_special_char(u.replaces.back())) u.replaces.pop_back();
  try {
    u.example = parse_kv_map(std::string_view(entry).substr(at + 13));
  } catch (const KvParseError&) {
    return std::nullopt;
  }
  for (const auto& [key, value] : u.example.items()) {
    u.params.push_back({key, value.is_object() ? ValueKind::map : ValueKind::text, kv_text(value)});
  }
  return u;
}

/// Text of a manual entry describing `usage`, as passed to UpdateTool.
inline std::string describe_usage(const ToolUsage& usage) {
  std::string sig = usage.name + "[";
  for (std::size_t i = 0; i < usage.params.size(); ++i) sig += (i ? ", " : "") + usage.params[i].name;
  sig += "]";
  return sig + ", which is an updated version of " + usage.replaces + ". For example, " + render_kv(usage.example) +
         ".";
}

/// Pulls the value of `field` out of a successful response in any of the
/// environment's response formats.
inline std::optional<std::string> extract_field(const std::string& text, const std::string& field) {
  if (!text.empty() && text.front() == '{') {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains(field)) return std::nullopt;
    return detail::field_text(j[field]);
  }
  std::string label = field + ": ";
  for (std::size_t pos = 0; pos < text.size();) {
    auto end = text.find("; ", pos);
    std::string part = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    if (part.rfind(label, 0) == 0) return part.substr(label.size());
    if (end == std::string::npos) break;
    pos = end + 2;
  }
  if (field == "count") {
    static const std::regex re(R"(\((\d+) rows?\))");
    std::smatch m;
    if (std::regex_search(text, m, re)) return m[1].str();
    return std::nullopt;
  }
  return text;
}

namespace detail {

inline std::string substitute_refs(const std::string& s, const std::vector<std::optional<std::string>>& results) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '{') {
      auto close = s.find('}', i);
      if (close != std::string::npos && close > i + 1) {
        std::string idx = s.substr(i + 1, close - i - 1);
        bool digits = std::all_of(idx.begin(), idx.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        if (digits) {
          std::size_t n = std::stoul(idx);
          out += n < results.size() && results[n] ? *results[n] : std::string();
          i = close;
          continue;
        }
      }
    }
    out += s[i];
  }
  return out;
}

inline KvMap resolve_args(const KvMap& args, const std::vector<std::optional<std::string>>& results) {
  KvMap out = KvMap::object();
  for (const auto& [k, v] : args.items()) out[k] = v.is_string() ? KvMap(substitute_refs(v.get<std::string>(), results)) : v;
  return out;
}

}  // namespace detail

class ScriptedPolicy : public Policy {
 public:
  ScriptedPolicy(ScriptMode mode, std::shared_ptr<const PlanBook> plans) : mode_(mode), plans_(std::move(plans)) {
    if (!plans_) throw PolicyError("scripted policy needs a plan book");
  }

  ScriptMode mode() const noexcept { return mode_; }

  /// The single next step this policy would take.
  ActionRecord next_step(const StateRecord& state) const {
    auto it = plans_->find(state.task.id);
    if (it == plans_->end()) throw PolicyError("no tool plan for task '" + state.task.id + "'");
    const TaskPlan& plan = it->second;
    if (plan.empty()) throw PolicyError("empty tool plan for task '" + state.task.id + "'");

    bool adaptive = mode_ != ScriptMode::rigid;
    std::map<std::string, ToolUsage> successors;  // keyed by the name they replace
    std::vector<std::optional<std::string>> results(plan.size());
    std::size_t cursor = 0;
    bool saw_invocation_error = false;

    if (adaptive) {
      for (const auto& entry : state.tool_manual) {
        if (auto u = usage_from_manual_entry(entry)) successors[u->replaces] = *u;
      }
    }
    for (const auto& step : state.steps) {
      if (!step.observation) continue;
      auto cls = classify_observation(*step.observation);
      if (cls == ObservationClass::invocation_error) saw_invocation_error = true;
      if (cls == ObservationClass::deprecation_error && adaptive) {
        if (auto u = usage_from_deprecation(*step.observation)) successors[u->replaces] = *u;
      }
      if (cls != ObservationClass::ok || cursor >= plan.size()) continue;
      if (step.action_name == kUpdateTool || step.action_name == kFinishTool) continue;
      const auto& want = plan[cursor].tool;
      auto succ = successors.find(want);
      bool matches = step.action_name == want || (succ != successors.end() && succ->second.name == step.action_name);
      if (!matches) continue;
      if (!plan[cursor].extract.empty()) results[cursor] = extract_field(*step.observation, plan[cursor].extract);
      ++cursor;
    }

    const ActionRecord* last = state.steps.empty() ? nullptr : &state.steps.back();
    auto last_cls = last && last->observation ? classify_observation(*last->observation) : ObservationClass::ok;

    if (last && last_cls == ObservationClass::deprecation_error && !adaptive) {
      return {"The call did not go through. I will try " + last->action_name + " again.", last->action_name,
              last->action_input, std::nullopt};
    }

    // Record a successor that has just worked, once per path.
    if (adaptive && last && last_cls == ObservationClass::ok && manual_offers_update(state)) {
      for (const auto& [old, usage] : successors) {
        if (usage.name != last->action_name) continue;
        if (already_recorded(state, usage)) break;
        ToolUsage doc = usage;
        doc.replaces = old;
        return {"The " + old + " tool has been replaced by " + usage.name +
                    ". I should record its usage in the tool descriptions.",
                std::string(kUpdateTool), KvMap{{"newtool_desc", describe_usage(doc)}}, std::nullopt};
      }
    }

    if (cursor >= plan.size()) cursor = plan.size() - 1;
    const PlanStep& next = plan[cursor];
    KvMap args = detail::resolve_args(next.args, results);
    if (next.tool == kFinishTool) {
      std::string answer = args.contains("answer") ? kv_text(args["answer"]) : std::string();
      return {"I now know the final answer: " + answer + ".", std::string(kFinishTool), args, std::nullopt};
    }

    std::string tool = next.tool;
    std::string thought = step_thought(next);
    if (adaptive) {
      if (auto s = successors.find(next.tool); s != successors.end()) {
        tool = s->second.name;
        args = convert_args(args, s->second.params);
        if (last && last_cls == ObservationClass::deprecation_error) {
          thought = "The " + next.tool + " tool has been deprecated. I should use " + tool + " instead.";
        }
      }
      if (last && last_cls == ObservationClass::invocation_error) {
        thought = "The previous call was rejected. I will retry " + tool + " with the documented parameters.";
      }
    }
    if (mode_ == ScriptMode::semi_adaptive && !saw_invocation_error && !args.empty()) {
      KvMap broken = KvMap::object();
      bool first = true;
      for (const auto& [k, v] : args.items()) {
        broken[first ? tool + "Name" : k] = v;
        first = false;
      }
      args = std::move(broken);
    }
    return {thought, tool, args, std::nullopt};
  }

  std::vector<std::string> propose(const StateRecord& state, int k) const override {
    if (k < 1) throw PolicyError("k must be positive");
    ActionRecord step = next_step(state);
    static const char* const kLeads[] = {"", "Let me think. ", "Next step: ", "OK. ", "Right. "};
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(k));
    std::string base = step.thought;
    for (int i = 0; i < k; ++i) {
      step.thought = kLeads[i % 5] + base;
      out.push_back(render_candidate(step));
    }
    return out;
  }

 private:
  static bool manual_offers_update(const StateRecord& state) {
    for (const auto& e : state.tool_manual)
      if (e.rfind(std::string(kUpdateTool) + "[", 0) == 0) return true;
    return false;
  }

  static bool already_recorded(const StateRecord& state, const ToolUsage& usage) {
    for (const auto& e : state.tool_manual)
      if (e.rfind(usage.name + "[", 0) == 0) return true;
    for (const auto& s : state.steps) {
      if (s.action_name != kUpdateTool || !s.action_input.contains("newtool_desc")) continue;
      if (kv_text(s.action_input["newtool_desc"]).rfind(usage.name + "[", 0) == 0) return true;
    }
    return false;
  }

  static std::string step_thought(const PlanStep& step) {
    if (step.tool == "LoadDB") return "I should first load the database that holds the information I need.";
    if (step.tool == "FilterDB") return "I can count the rows that satisfy the question's conditions.";
    if (step.tool == "GetValue") return "I need to read the relevant value from the database.";
    if (step.tool == "Calculate") return "I can compute the answer from the values I have.";
    return "I will call " + step.tool + ".";
  }

  ScriptMode mode_;
  std::shared_ptr<const PlanBook> plans_;
};

}  // namespace tooldrift
