#pragma once

// Successful-path extraction and SFT export.
//
// Record format (one JSON object per line, schema "tooldrift.sft/v1"):
//   task_id, registry_generation, tree_id, leaf_id, reward,
//   prompt_format, input (rendered root prompt), target (rendered steps).

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tooldrift/mcts.hpp"
#include "tooldrift/react.hpp"
#include "tooldrift/rng.hpp"

namespace tooldrift {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  std::string task_id;
  std::vector<ActionRecord> steps;
  int reward = -1;
  std::string tree_id;
  int leaf_id = 0;
  std::string registry_generation;
  std::string input;  // rendered root prompt

  bool operator==(const Trajectory&) const = default;
};

inline Trajectory trajectory_at(const SearchTree& tree, int leaf) {
  Trajectory t;
  t.task_id = tree.root_state.task.id;
  for (const ActionRecord* s : path_steps(tree, leaf)) t.steps.push_back(*s);
  t.reward = tree.node(leaf).reward.value_or(-1);
  t.tree_id = tree.tree_id;
  t.leaf_id = leaf;
  t.registry_generation = tree.registry_generation;
  t.input = render_prompt(tree.root_state);
  return t;
}

/// Seeded subsample of at most `max_count` items; kept items stay in order.
template <typename T>
std::vector<T> subsample(std::vector<T> items, std::size_t max_count, std::uint64_t seed) {
  if (items.size() <= max_count) return items;
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < max_count; ++i) {
    std::size_t j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_count);
  std::sort(idx.begin(), idx.end());
  std::vector<T> out;
  out.reserve(max_count);
  for (auto i : idx) out.push_back(std::move(items[i]));
  return out;
}

/// Terminal paths ending in reward +1 (cached ones included), subsampled to
/// `max_per_task`. With `include_failed`, -1 terminals are returned too.
inline std::vector<Trajectory> extract_successful(const SearchTree& tree, std::size_t max_per_task = 4,
                                                  std::uint64_t seed = 0, bool include_failed = false) {
  std::vector<Trajectory> all;
  for (const auto& n : tree.nodes) {
    if (!n.terminal || !n.action) continue;
    if (n.reward != 1 && !include_failed) continue;
    all.push_back(trajectory_at(tree, n.id));
  }
  return subsample(std::move(all), max_per_task, mix_seed(seed, tree.tree_id));
}

/// Replays a trajectory's steps through the environment; returns the index
/// of the first step whose observation differs, or nullopt when all match.
inline std::optional<std::size_t> replay_mismatch(const Trajectory& t, const StateRecord& root,
                                                  const ToolRegistry& registry, const AdaptConfig& adapt = {}) {
  StateRecord s = root;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& step = t.steps[i];
    Observation obs = execute_action(s, step, registry, adapt);
    if (!step.observation || obs.text != *step.observation) return i;
    if (step.action_name == kUpdateTool && obs.text == kToolUpdatedMessage) {
      s = apply_update_tool(std::move(s), kv_text(step.action_input["newtool_desc"])).state;
    }
    s.steps.push_back(step);
  }
  return std::nullopt;
}

inline OrderedJson to_sft_json(const Trajectory& t) {
  OrderedJson j;
  j["schema"] = "tooldrift.sft/v1";
  j["task_id"] = t.task_id;
  j["registry_generation"] = t.registry_generation;
  j["tree_id"] = t.tree_id;
  j["leaf_id"] = t.leaf_id;
  j["reward"] = t.reward;
  j["prompt_format"] = kPromptFormat;
  j["input"] = t.input;
  j["target"] = render_steps(t.steps);
  return j;
}

inline Trajectory trajectory_from_sft(const OrderedJson& j) {
  if (detail::require_string(j, "schema") != "tooldrift.sft/v1") throw FormatError("unsupported SFT schema");
  Trajectory t;
  t.task_id = detail::require_string(j, "task_id");
  t.registry_generation = detail::require_string(j, "registry_generation");
  t.tree_id = detail::require_string(j, "tree_id");
  t.leaf_id = detail::require(j, "leaf_id").get<int>();
  t.reward = detail::require(j, "reward").get<int>();
  t.input = detail::require_string(j, "input");
  try {
    t.steps = parse_transcript(detail::require_string(j, "target"));
  } catch (const ActionParseError& e) {
    throw FormatError(std::string("SFT target does not parse: ") + e.what());
  }
  return t;
}

inline std::string sft_lines(const std::vector<Trajectory>& trajectories) {
  std::string out;
  for (const auto& t : trajectories) out += to_sft_json(t).dump() + "\n";
  return out;
}

/// Writes the records to `path` (replacing it) and returns the count.
inline std::size_t export_sft(const std::vector<Trajectory>& trajectories, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << sft_lines(trajectories);
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
  return trajectories.size();
}

inline std::vector<Trajectory> parse_sft(std::string_view text) {
  std::vector<Trajectory> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(trajectory_from_sft(OrderedJson::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("SFT line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Trajectory> read_sft(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sft(ss.str());
}

}  // namespace tooldrift
