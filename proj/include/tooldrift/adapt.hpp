#pragma once

// Observation classification, the reflection gate and the UpdateTool
// system tool.

#include <algorithm>
#include <string>
#include <string_view>

#include "tooldrift/env.hpp"
#include "tooldrift/react.hpp"

namespace tooldrift {

enum class ObservationClass { ok, invocation_error, deprecation_error, task_done };

inline std::string_view to_string(ObservationClass c) {
  switch (c) {
    case ObservationClass::ok: return "ok";
    case ObservationClass::invocation_error: return "invocation_error";
    case ObservationClass::deprecation_error: return "deprecation_error";
    case ObservationClass::task_done: return "task_done";
  }
  return "ok";
}

/// Classifies raw observation text by the environment's message templates.
inline ObservationClass classify_observation(std::string_view text) {
  if (text.find("is deprecated") != std::string_view::npos) return ObservationClass::deprecation_error;
  if (text.find("Your action is filtered") != std::string_view::npos) return ObservationClass::invocation_error;
  if (text.substr(0, 9) == "Answer is") return ObservationClass::task_done;
  return ObservationClass::ok;
}

inline ObservationClass classify(const Observation& o) {
  switch (o.kind) {
    case ObservationKind::response: return ObservationClass::ok;
    case ObservationKind::invocation_error: return ObservationClass::invocation_error;
    case ObservationKind::deprecation_error: return ObservationClass::deprecation_error;
    case ObservationKind::task_done: return ObservationClass::task_done;
  }
  return ObservationClass::ok;
}

inline bool is_error(ObservationClass c) {
  return c == ObservationClass::invocation_error || c == ObservationClass::deprecation_error;
}

struct UpdateOutcome {
  StateRecord state;
  Observation observation;
};

/// Appends `newtool_desc` to the state's manual unless the exact text is
/// already there.
inline UpdateOutcome apply_update_tool(StateRecord state, std::string_view newtool_desc) {
  if (trim(newtool_desc).empty()) return {std::move(state), Observation::invocation_error()};
  std::string desc(newtool_desc);
  auto& manual = state.tool_manual;
  if (std::find(manual.begin(), manual.end(), desc) == manual.end()) manual.push_back(std::move(desc));
  return {std::move(state), Observation::response(std::string(kToolUpdatedMessage))};
}

struct AdaptConfig {
  bool no_self_reflection = false;  // invocation errors end the path
  bool no_tool_update = false;      // UpdateTool is hidden and refused

  bool operator==(const AdaptConfig&) const = default;
};

enum class ExpansionMode { normal, reflective, terminate };

inline std::string_view to_string(ExpansionMode m) {
  switch (m) {
    case ExpansionMode::normal: return "normal";
    case ExpansionMode::reflective: return "reflective";
    case ExpansionMode::terminate: return "terminate";
  }
  return "normal";
}

/// How a node whose last observation has class `last` is expanded.
inline ExpansionMode reflection_gate(ObservationClass last, const AdaptConfig& config) {
  if (last == ObservationClass::invocation_error && config.no_self_reflection) return ExpansionMode::terminate;
  return is_error(last) ? ExpansionMode::reflective : ExpansionMode::normal;
}

}  // namespace tooldrift
