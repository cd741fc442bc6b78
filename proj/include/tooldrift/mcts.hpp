#pragma once

// PUCT tree search over tool-use trajectories.
//
// Nodes live in a flat vector; a node's id is its index. Each non-root node
// holds one executed step, so the state at a node is the root state plus the
// steps on its path (with UpdateTool successes replayed into the manual).
// Rollouts store every node they create as `cached`; cached nodes are
// invisible to selection until expansion of their parent unhides them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tooldrift/adapt.hpp"
#include "tooldrift/env.hpp"
#include "tooldrift/policy.hpp"
#include "tooldrift/react.hpp"
#include "tooldrift/rng.hpp"

namespace tooldrift {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchConfig {
  double c_puct = 1.25;
  int max_depth = 15;
  int k = 5;
  int max_simulations = 30;
  int trees_per_task = 20;
  std::uint64_t rng_seed = 0;
  bool use_cache = true;
  AdaptConfig adapt;

  bool operator==(const SearchConfig&) const = default;
};

inline void validate(const SearchConfig& c) {
  if (!(c.c_puct > 0) || !std::isfinite(c.c_puct)) throw ConfigError("c_puct must be positive");
  if (c.max_depth < 1) throw ConfigError("max_depth must be positive");
  if (c.k < 1) throw ConfigError("k must be positive");
  if (c.max_simulations < 1) throw ConfigError("max_simulations must be positive");
  if (c.trees_per_task < 1) throw ConfigError("trees_per_task must be positive");
}

struct TreeNode {
  int id = 0;
  std::optional<int> parent;
  std::optional<ActionRecord> action;
  std::optional<ObservationKind> observation_kind;
  double q = 0.0;
  long visits = 0;
  double prior = 1.0;
  std::vector<int> children;
  bool cached = false;
  int depth = 0;
  bool terminal = false;
  std::optional<int> reward;
  std::optional<std::string> failure;
  std::string path;  // child indices from the root, e.g. "r.0.3"

  bool operator==(const TreeNode&) const = default;
};

struct SearchStats {
  long policy_calls = 0;
  long iterations = 0;
  long depth_pruned = 0;
  long cache_hits = 0;
  long nodes_created = 0;
  long rolled_back = 0;

  bool operator==(const SearchStats&) const = default;
};

struct SearchTree {
  std::string tree_id;
  std::string registry_generation;
  StateRecord root_state;
  SearchConfig config;
  std::vector<TreeNode> nodes;
  SearchStats stats;

  const TreeNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  TreeNode& node(int id) { return nodes.at(static_cast<std::size_t>(id)); }

  bool operator==(const SearchTree&) const = default;
};

inline double puct_score(long parent_visits, const TreeNode& child, double c_puct) {
  return child.q + c_puct * child.prior * std::sqrt(static_cast<double>(parent_visits)) /
                       (1.0 + static_cast<double>(child.visits));
}

/// Index into `candidates` of the highest PUCT score; ties go to the lowest
/// index. Empty input yields nullopt.
inline std::optional<std::size_t> select_among(long parent_visits, const std::vector<const TreeNode*>& candidates,
                                               double c_puct) {
  std::optional<std::size_t> best;
  double best_score = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double s = puct_score(parent_visits, *candidates[i], c_puct);
    if (!best || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

inline void backpropagate(SearchTree& tree, int id, double reward) {
  std::optional<int> cur = id;
  while (cur) {
    TreeNode& n = tree.node(*cur);
    n.q += (reward - n.q) / static_cast<double>(n.visits + 1);
    n.visits += 1;
    cur = n.parent;
  }
}

/// Root-to-node steps.
inline std::vector<const ActionRecord*> path_steps(const SearchTree& tree, int id) {
  std::vector<const ActionRecord*> out;
  for (std::optional<int> cur = id; cur; cur = tree.node(*cur).parent) {
    const auto& n = tree.node(*cur);
    if (n.action) out.push_back(&*n.action);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

/// Materializes the state at a node.
inline StateRecord state_at(const SearchTree& tree, int id) {
  StateRecord s = tree.root_state;
  for (const ActionRecord* step : path_steps(tree, id)) {
    if (step->action_name == kUpdateTool && step->observation == std::string(kToolUpdatedMessage) &&
        step->action_input.contains("newtool_desc")) {
      s = apply_update_tool(std::move(s), kv_text(step->action_input["newtool_desc"])).state;
    }
    s.steps.push_back(*step);
  }
  return s;
}

/// Environment side of one step: Finish is scored, UpdateTool edits the
/// manual (unless disabled), anything else goes to the deployed registry.
inline Observation execute_action(const StateRecord& state, const ActionRecord& action, const ToolRegistry& registry,
                                  const AdaptConfig& adapt) {
  if (action.action_name == kFinishTool) {
    if (action.action_input.size() != 1 || !action.action_input.contains("answer")) {
      return Observation::invocation_error();
    }
    return evaluate(state.task, kv_text(action.action_input["answer"]));
  }
  if (action.action_name == kUpdateTool) {
    if (adapt.no_tool_update || action.action_input.size() != 1 || !action.action_input.contains("newtool_desc") ||
        !action.action_input["newtool_desc"].is_string()) {
      return Observation::invocation_error();
    }
    return apply_update_tool(state, action.action_input["newtool_desc"].get<std::string>()).observation;
  }
  return invoke(registry, action.action_name, action.action_input);
}

/// Runs one search tree. Not thread-safe per tree; different trees may run
/// concurrently with a shared registry and policy.
class Search {
 public:
  Search(SearchTree& tree, const ToolRegistry& registry, const Policy& policy)
      : tree_(tree), registry_(registry), policy_(policy) {
    if (tree_.nodes.empty()) {
      TreeNode root;
      root.path = "r";
      tree_.nodes.push_back(std::move(root));
      open_.insert(0);
    }
  }

  const std::set<int>& open_leaves() const { return open_; }

  /// Walks from the root through visible, non-terminal children and returns
  /// the first member of the open set reached. Subtrees without open leaves
  /// are skipped. nullopt when the open set is empty.
  std::optional<int> select_leaf() const {
    if (open_.empty()) return std::nullopt;
    std::vector<char> live(tree_.nodes.size(), 0);
    for (int id : open_) {
      for (std::optional<int> cur = id; cur && !live[static_cast<std::size_t>(*cur)]; cur = tree_.node(*cur).parent) {
        live[static_cast<std::size_t>(*cur)] = 1;
      }
    }
    int cur = 0;
    while (!open_.count(cur)) {
      const TreeNode& n = tree_.node(cur);
      std::vector<const TreeNode*> options;
      for (int c : n.children) {
        const TreeNode& ch = tree_.node(c);
        if (!ch.cached && !ch.terminal && live[static_cast<std::size_t>(c)]) options.push_back(&ch);
      }
      auto pick = select_among(n.visits, options, tree_.config.c_puct);
      if (!pick) return std::nullopt;
      cur = options[*pick]->id;
    }
    return cur;
  }

  /// Adds k children under `leaf`, reusing cached rollout children when
  /// present. Returns the child ids (empty when the policy failed, in which
  /// case the leaf is now a failed terminal).
  std::vector<int> expand(int leaf) {
    TreeNode& n = tree_.node(leaf);
    if (!n.children.empty()) {
      ++tree_.stats.cache_hits;
      for (int c : n.children) tree_.node(c).cached = false;
      return n.children;
    }
    auto made = generate_children(leaf, false);
    if (!made) {
      TreeNode& failed = tree_.node(leaf);
      failed.terminal = true;
      failed.reward = -1;
      failed.failure = failure_text_;
      return {};
    }
    return *made;
  }

  /// Cached rollout from `id`; returns the episode reward.
  int simulate_cached(int id) {
    std::size_t mark = tree_.nodes.size();
    std::vector<std::pair<int, std::size_t>> grown;  // (parent, old child count) when rolling back
    int cur = id;
    int reward = -1;
    while (true) {
      const TreeNode& n = tree_.node(cur);
      if (n.terminal) {
        reward = n.reward.value_or(-1);
        break;
      }
      if (n.depth >= tree_.config.max_depth) {
        reward = -1;
        break;
      }
      if (n.children.empty()) {
        auto made = generate_children(cur, true);
        if (!made) {
          reward = -1;
          break;
        }
        grown.emplace_back(cur, 0);
      }
      const TreeNode& now = tree_.node(cur);
      auto choice = pick_index(tree_.config.rng_seed, "rollout:" + now.path, now.children.size());
      cur = now.children[choice];
    }
    if (!tree_.config.use_cache) {
      for (auto& [parent, count] : grown) tree_.node(parent).children.resize(count);
      tree_.stats.rolled_back += static_cast<long>(tree_.nodes.size() - mark);
      tree_.nodes.resize(mark);
    }
    return reward;
  }

  /// One select, expand, simulate, backpropagate iteration. Returns false when the open set is empty.
  bool step() {
    while (true) {
      auto leaf = select_leaf();
      if (!leaf) return false;
      if (tree_.node(*leaf).depth >= tree_.config.max_depth) {
        open_.erase(*leaf);
        ++tree_.stats.depth_pruned;
        continue;
      }
      open_.erase(*leaf);
      auto children = expand(*leaf);
      ++tree_.stats.iterations;
      if (children.empty()) {
        backpropagate(tree_, *leaf, -1);
        return true;
      }
      for (int c : children)
        if (!tree_.node(c).terminal) open_.insert(c);
      auto pick = pick_index(tree_.config.rng_seed, "expand:" + tree_.node(*leaf).path, children.size());
      int chosen = children[pick];
      int reward = simulate_cached(chosen);
      backpropagate(tree_, chosen, reward);
      return true;
    }
  }

  void run() {
    while (tree_.stats.iterations < tree_.config.max_simulations && step()) {
    }
  }

 private:
  std::optional<std::vector<int>> generate_children(int parent, bool cached) {
    StateRecord state = state_at(tree_, parent);
    std::vector<std::string> candidates;
    ++tree_.stats.policy_calls;
    try {
      candidates = policy_.propose(state, tree_.config.k);
    } catch (const std::exception& e) {
      failure_text_ = std::string("policy error: ") + e.what();
      return std::nullopt;
    }
    if (candidates.size() != static_cast<std::size_t>(tree_.config.k)) {
      failure_text_ = "policy returned " + std::to_string(candidates.size()) + " candidates";
      return std::nullopt;
    }
    std::vector<int> ids;
    const double prior = 1.0 / static_cast<double>(tree_.config.k);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      TreeNode child;
      child.id = static_cast<int>(tree_.nodes.size());
      child.parent = parent;
      child.prior = prior;
      child.cached = cached;
      child.depth = tree_.node(parent).depth + 1;
      child.path = tree_.node(parent).path + "." + std::to_string(i);
      try {
        ActionRecord action = parse_action(candidates[i]);
        Observation obs = execute_action(state, action, registry_, tree_.config.adapt);
        action.observation = obs.text;
        child.observation_kind = obs.kind;
        child.action = std::move(action);
        if (obs.kind == ObservationKind::task_done) {
          child.terminal = true;
          child.reward = obs.reward.value_or(-1);
        } else if (reflection_gate(classify(obs), tree_.config.adapt) == ExpansionMode::terminate) {
          child.terminal = true;
          child.reward = -1;
          child.failure = "invocation error with self-reflection disabled";
        }
      } catch (const ActionParseError& e) {
        child.terminal = true;
        child.reward = -1;
        child.failure = "unparseable candidate (" + e.field() + "): " + e.what();
      }
      ids.push_back(child.id);
      tree_.nodes.push_back(std::move(child));
      tree_.node(parent).children.push_back(ids.back());
      ++tree_.stats.nodes_created;
    }
    return ids;
  }

  SearchTree& tree_;
  const ToolRegistry& registry_;
  const Policy& policy_;
  std::set<int> open_;
  std::string failure_text_;
};

inline SearchTree run_search(const StateRecord& root_state, const ToolRegistry& registry, const Policy& policy,
                             const SearchConfig& config, std::string tree_id = "tree") {
  validate(config);
  SearchTree tree;
  tree.tree_id = std::move(tree_id);
  tree.registry_generation = registry.generation;
  tree.root_state = root_state;
  tree.config = config;
  Search search(tree, registry, policy);
  search.run();
  return tree;
}

/// Seed of tree `index` for a task.
inline std::uint64_t tree_seed(std::uint64_t base, std::string_view task_id, int index) {
  return mix_seed(mix_seed(base, task_id), static_cast<std::uint64_t>(index));
}

inline bool has_success(const SearchTree& tree) {
  return std::any_of(tree.nodes.begin(), tree.nodes.end(),
                     [](const TreeNode& n) { return n.terminal && n.reward == 1; });
}

// ---------------------------------------------------------------------------
// Serialization

inline OrderedJson to_json(const SearchConfig& c) {
  OrderedJson j;
  j["c_puct"] = c.c_puct;
  j["max_depth"] = c.max_depth;
  j["k"] = c.k;
  j["max_simulations"] = c.max_simulations;
  j["trees_per_task"] = c.trees_per_task;
  j["rng_seed"] = c.rng_seed;
  j["use_cache"] = c.use_cache;
  j["no_self_reflection"] = c.adapt.no_self_reflection;
  j["no_tool_update"] = c.adapt.no_tool_update;
  return j;
}

template <typename J>
SearchConfig search_config_from_json(const J& j) {
  SearchConfig c;
  c.c_puct = detail::require(j, "c_puct").template get<double>();
  c.max_depth = detail::require(j, "max_depth").template get<int>();
  c.k = detail::require(j, "k").template get<int>();
  c.max_simulations = detail::require(j, "max_simulations").template get<int>();
  c.trees_per_task = detail::require(j, "trees_per_task").template get<int>();
  c.rng_seed = detail::require(j, "rng_seed").template get<std::uint64_t>();
  c.use_cache = detail::require(j, "use_cache").template get<bool>();
  c.adapt.no_self_reflection = detail::require(j, "no_self_reflection").template get<bool>();
  c.adapt.no_tool_update = detail::require(j, "no_tool_update").template get<bool>();
  return c;
}

inline OrderedJson to_json(const SearchTree& t) {
  OrderedJson j;
  j["schema"] = "tooldrift.tree/v1";
  j["tree_id"] = t.tree_id;
  j["registry_generation"] = t.registry_generation;
  j["task"] = to_json(t.root_state.task);
  j["root_state"] = {{"tool_manual", t.root_state.tool_manual}, {"demos", t.root_state.demos}};
  j["config"] = to_json(t.config);
  j["stats"] = {{"policy_calls", t.stats.policy_calls},   {"iterations", t.stats.iterations},
                {"depth_pruned", t.stats.depth_pruned},   {"cache_hits", t.stats.cache_hits},
                {"nodes_created", t.stats.nodes_created}, {"rolled_back", t.stats.rolled_back}};
  OrderedJson nodes = OrderedJson::array();
  for (const auto& n : t.nodes) {
    OrderedJson o;
    o["id"] = n.id;
    o["parent"] = n.parent ? OrderedJson(*n.parent) : OrderedJson(nullptr);
    o["path"] = n.path;
    o["depth"] = n.depth;
    o["action"] = n.action ? to_json(*n.action) : OrderedJson(nullptr);
    o["observation_kind"] = n.observation_kind ? OrderedJson(to_string(*n.observation_kind)) : OrderedJson(nullptr);
    o["q"] = n.q;
    o["visits"] = n.visits;
    o["prior"] = n.prior;
    o["children"] = n.children;
    o["cached"] = n.cached;
    o["terminal"] = n.terminal;
    o["reward"] = n.reward ? OrderedJson(*n.reward) : OrderedJson(nullptr);
    o["failure"] = n.failure ? OrderedJson(*n.failure) : OrderedJson(nullptr);
    nodes.push_back(std::move(o));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

inline std::string serialize_tree(const SearchTree& t) { return to_json(t).dump(1) + "\n"; }

inline SearchTree parse_tree(std::string_view text) {
  OrderedJson j;
  try {
    j = OrderedJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("tree file is not valid JSON: ") + e.what());
  }
  try {
    if (detail::require_string(j, "schema") != "tooldrift.tree/v1") throw FormatError("unsupported tree schema");
    SearchTree t;
    t.tree_id = detail::require_string(j, "tree_id");
    t.registry_generation = detail::require_string(j, "registry_generation");
    t.root_state.task = task_from_json(detail::require(j, "task"));
    const auto& root = detail::require(j, "root_state");
    t.root_state.tool_manual = detail::require(root, "tool_manual").get<std::vector<std::string>>();
    t.root_state.demos = detail::require(root, "demos").get<std::vector<std::string>>();
    t.config = search_config_from_json(detail::require(j, "config"));
    const auto& st = detail::require(j, "stats");
    t.stats.policy_calls = detail::require(st, "policy_calls").get<long>();
    t.stats.iterations = detail::require(st, "iterations").get<long>();
    t.stats.depth_pruned = detail::require(st, "depth_pruned").get<long>();
    t.stats.cache_hits = detail::require(st, "cache_hits").get<long>();
    t.stats.nodes_created = detail::require(st, "nodes_created").get<long>();
    t.stats.rolled_back = detail::require(st, "rolled_back").get<long>();
    for (const auto& o : detail::require(j, "nodes")) {
      TreeNode n;
      n.id = detail::require(o, "id").get<int>();
      if (n.id != static_cast<int>(t.nodes.size())) throw FormatError("node ids must be dense and ordered");
      if (const auto& p = detail::require(o, "parent"); !p.is_null()) n.parent = p.get<int>();
      n.path = detail::require_string(o, "path");
      n.depth = detail::require(o, "depth").get<int>();
      if (const auto& a = detail::require(o, "action"); !a.is_null()) n.action = action_from_json(a);
      if (const auto& k = detail::require(o, "observation_kind"); !k.is_null()) {
        n.observation_kind = observation_kind_from_string(k.get<std::string>());
      }
      n.q = detail::require(o, "q").get<double>();
      n.visits = detail::require(o, "visits").get<long>();
      n.prior = detail::require(o, "prior").get<double>();
      n.children = detail::require(o, "children").get<std::vector<int>>();
      n.cached = detail::require(o, "cached").get<bool>();
      n.terminal = detail::require(o, "terminal").get<bool>();
      if (const auto& r = detail::require(o, "reward"); !r.is_null()) n.reward = r.get<int>();
      if (const auto& f = detail::require(o, "failure"); !f.is_null()) n.failure = f.get<std::string>();
      t.nodes.push_back(std::move(n));
    }
    for (const auto& n : t.nodes) {
      if (n.parent && (*n.parent < 0 || *n.parent >= static_cast<int>(t.nodes.size()))) {
        throw FormatError("node " + std::to_string(n.id) + " has an invalid parent");
      }
      for (int c : n.children) {
        if (c < 0 || c >= static_cast<int>(t.nodes.size())) {
          throw FormatError("node " + std::to_string(n.id) + " has an invalid child");
        }
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed tree: ") + e.what());
  }
}

/// Structural invariant violations of a finished tree.
inline std::vector<std::string> check_tree(const SearchTree& t) {
  std::vector<std::string> out;
  auto where = [](const TreeNode& n) { return "node " + std::to_string(n.id) + ": "; };
  for (const auto& n : t.nodes) {
    if (n.visits < 0) out.push_back(where(n) + "negative visit count");
    if (n.q < -1.0 - 1e-12 || n.q > 1.0 + 1e-12) out.push_back(where(n) + "Q outside [-1, 1]");
    if (n.terminal != n.reward.has_value()) out.push_back(where(n) + "terminal flag and reward disagree");
    if (n.reward && *n.reward != 1 && *n.reward != -1) out.push_back(where(n) + "reward not in {-1, +1}");
    if (!n.cached && n.depth > t.config.max_depth) out.push_back(where(n) + "visible node deeper than max_depth");
    if (n.parent) {
      const auto& p = t.node(*n.parent);
      if (n.depth != p.depth + 1) out.push_back(where(n) + "depth is not parent depth + 1");
      if (std::find(p.children.begin(), p.children.end(), n.id) == p.children.end()) {
        out.push_back(where(n) + "missing from its parent's children");
      }
      if (!n.action && !n.failure) out.push_back(where(n) + "non-root node without an action");
    } else if (n.id != 0) {
      out.push_back(where(n) + "second root");
    }
    if (n.action && !n.action->observation && !n.failure) out.push_back(where(n) + "step was never executed");
  }
  if (!t.nodes.empty() && t.nodes[0].visits != t.stats.iterations) {
    out.push_back("root visit count " + std::to_string(t.nodes[0].visits) + " differs from iteration count " +
                  std::to_string(t.stats.iterations));
  }
  return out;
}

}  // namespace tooldrift
