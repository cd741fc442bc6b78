#pragma once

// Step format and prompt assembly.
//
// One step in text form:
//
//   Thought: <free text>
//   Action: <tool name>
//   Action Input: {"Key": "value", ...}
//   Observation: <environment feedback>
//
// Policies emit the first three lines; the environment fills in the
// observation. The prompt (format "tooldrift.prompt/v1") is:
//
//   <header>
//   (1) <tool manual entry>
//   ...
//   <demo blocks>
//   (END OF EXAMPLES)
//   Question: <task description>
//   <step blocks>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tooldrift/env.hpp"
#include "tooldrift/kv.hpp"

namespace tooldrift {

inline constexpr std::string_view kPromptFormat = "tooldrift.prompt/v1";

inline constexpr std::string_view kPromptHeader =
    "Solve a question answering task with interleaving Thought, Action, Observation steps. Thought can reason "
    "about the current situation, and Action can call one of the following tools:\n";

struct ActionRecord {
  std::string thought;
  std::string action_name;
  KvMap action_input = KvMap::object();
  std::optional<std::string> observation;

  bool operator==(const ActionRecord&) const = default;
};

struct StateRecord {
  TaskInstance task;
  std::vector<std::string> tool_manual;
  std::vector<std::string> demos;
  std::vector<ActionRecord> steps;

  bool operator==(const StateRecord&) const = default;
};

class ActionParseError : public std::runtime_error {
 public:
  ActionParseError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace detail {

/// Offset of the first line in [from, to) that starts with `label`.
inline std::size_t find_label(std::string_view text, std::string_view label, std::size_t from = 0,
                              std::size_t to = std::string_view::npos) {
  if (to > text.size()) to = text.size();
  std::size_t pos = from;
  while (pos < to) {
    if (text.substr(pos, label.size()) == label && pos + label.size() <= to) return pos;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return std::string_view::npos;
}

inline std::string_view line_rest(std::string_view text, std::size_t from) {
  auto nl = text.find('\n', from);
  return text.substr(from, nl == std::string_view::npos ? std::string_view::npos : nl - from);
}

struct ParsedStep {
  ActionRecord record;
  std::size_t end = 0;  // offset just past the Action Input map
};

inline ParsedStep parse_step_at(std::string_view text, std::size_t from) {
  constexpr std::string_view kThought = "Thought:";
  constexpr std::string_view kAction = "Action:";
  constexpr std::string_view kInput = "Action Input:";

  auto input_at = find_label(text, kInput, from);
  auto thought_at = find_label(text, kThought, from, input_at);
  if (thought_at == std::string_view::npos) throw ActionParseError("Thought", "missing 'Thought:' field");
  auto action_at = find_label(text, kAction, thought_at, input_at);
  if (action_at == std::string_view::npos) throw ActionParseError("Action", "missing 'Action:' field");
  if (input_at == std::string_view::npos) throw ActionParseError("Action Input", "missing 'Action Input:' field");

  ParsedStep out;
  auto thought_begin = thought_at + kThought.size();
  out.record.thought = std::string(trim(text.substr(thought_begin, action_at - thought_begin)));
  out.record.action_name = std::string(trim(line_rest(text, action_at + kAction.size())));
  if (out.record.action_name.empty()) throw ActionParseError("Action", "empty action name");

  auto brace = text.find('{', input_at + kInput.size());
  if (brace == std::string_view::npos) throw ActionParseError("Action Input", "action input has no '{'");
  std::size_t used = 0;
  try {
    out.record.action_input = parse_kv_map(text.substr(brace), &used);
  } catch (const KvParseError& e) {
    throw ActionParseError("Action Input", std::string("action input: ") + e.what());
  }
  out.end = brace + used;
  return out;
}

}  // namespace detail

/// Parses one policy candidate. Text after the Action Input map is ignored.
inline ActionRecord parse_action(std::string_view text) { return detail::parse_step_at(text, 0).record; }

/// Parses a sequence of rendered steps, observations included.
inline std::vector<ActionRecord> parse_transcript(std::string_view text) {
  std::vector<ActionRecord> out;
  std::size_t pos = detail::find_label(text, "Thought:");
  while (pos != std::string_view::npos) {
    auto step = detail::parse_step_at(text, pos);
    std::size_t next = step.end;
    auto nl = text.find('\n', next);
    if (nl != std::string_view::npos && text.substr(nl + 1, 13) == "Observation: ") {
      auto obs_at = nl + 1 + 13;
      step.record.observation = std::string(detail::line_rest(text, obs_at));
      next = obs_at;
    }
    out.push_back(std::move(step.record));
    pos = detail::find_label(text, "Thought:", next);
  }
  return out;
}

/// Renders a step; the observation line is present iff the step was executed.
inline std::string render_step(const ActionRecord& step) {
  std::string out = "Thought: " + step.thought + "\nAction: " + step.action_name +
                    "\nAction Input: " + render_kv(step.action_input) + "\n";
  if (step.observation) out += "Observation: " + *step.observation + "\n";
  return out;
}

inline std::string render_steps(const std::vector<ActionRecord>& steps) {
  std::string out;
  for (const auto& s : steps) out += render_step(s);
  return out;
}

/// Candidate text as a policy would emit it (no observation, no newline).
inline std::string render_candidate(const ActionRecord& step) {
  ActionRecord bare = step;
  bare.observation.reset();
  std::string out = render_step(bare);
  out.pop_back();
  return out;
}

inline std::string render_prompt(const StateRecord& state) {
  std::string out(kPromptHeader);
  for (std::size_t i = 0; i < state.tool_manual.size(); ++i) {
    out += "(" + std::to_string(i + 1) + ") " + state.tool_manual[i] + "\n";
  }
  out += "Here are some examples:\n";
  for (const auto& d : state.demos) {
    out += d;
    if (!d.empty() && d.back() != '\n') out += "\n";
  }
  out += "(END OF EXAMPLES)\n";
  out += "Question: " + state.task.description + "\n";
  out += render_steps(state.steps);
  return out;
}

/// Root state s0: the task plus the prompt-side tool manual.
inline StateRecord initial_state(const TaskInstance& task, const ToolRegistry& prompt_registry,
                                 std::vector<std::string> demos, bool include_update_tool = true) {
  return StateRecord{task, prompt_manual(prompt_registry, include_update_tool), std::move(demos), {}};
}

// JSON form, shared by the tree and trajectory files.

inline OrderedJson to_json(const ActionRecord& a) {
  OrderedJson j;
  j["thought"] = a.thought;
  j["action_name"] = a.action_name;
  j["action_input"] = a.action_input;
  j["observation"] = a.observation ? OrderedJson(*a.observation) : OrderedJson(nullptr);
  return j;
}

template <typename J>
ActionRecord action_from_json(const J& j) {
  ActionRecord a;
  a.thought = detail::require_string(j, "thought");
  a.action_name = detail::require_string(j, "action_name");
  a.action_input = KvMap(detail::require(j, "action_input"));
  if (!a.action_input.is_object()) throw FormatError("action_input must be an object");
  const auto& obs = detail::require(j, "observation");
  if (!obs.is_null()) a.observation = obs.template get<std::string>();
  return a;
}

}  // namespace tooldrift
