#include <gtest/gtest.h>

#include <numeric>

#include "tooldrift/corpus.hpp"
#include "tooldrift/mcts.hpp"
#include "tooldrift/mutation.hpp"
#include "tooldrift/policy.hpp"

using namespace tooldrift;

namespace {

ToolRegistry with_deprecated_loaddb() {
  ToolRegistry r = builtin_registry();
  ApiSpec old = *r.find("LoadDB");
  ApiSpec next = old;
  next.name = "InitializeDatabase";
  next.params[0].name = "DatabaseName";
  next.description = "initializes database DatabaseName";
  old.replaced_by = next.name;
  r.apis[0] = next;
  r.bindings.erase("LoadDB");
  r.bindings["InitializeDatabase"] = {"load_db", ResponseFormat::sentence};
  r.deprecated["LoadDB"] = {old, render_kv(param_example(next))};
  return r;
}

StateRecord root_for(const TaskInstance& t, bool update_tool = true) {
  return initial_state(t, builtin_registry(), builtin_demos(), update_tool);
}

StateRecord root_for(const std::string& id, bool update_tool = true) {
  for (const auto& t : builtin_tasks())
    if (t.id == id) return root_for(t, update_tool);
  throw std::runtime_error(id);
}

const ScriptedPolicy& adaptive() {
  static const ScriptedPolicy p(ScriptMode::adaptive, builtin_plans());
  return p;
}

const ScriptedPolicy& rigid() {
  static const ScriptedPolicy p(ScriptMode::rigid, builtin_plans());
  return p;
}

SearchTree fresh_tree(const StateRecord& root, SearchConfig config = {}) {
  SearchTree t;
  t.tree_id = "t";
  t.root_state = root;
  t.config = config;
  return t;
}

TreeNode plain_node(double q, long visits, double prior) {
  TreeNode n;
  n.q = q;
  n.visits = visits;
  n.prior = prior;
  return n;
}

class ThrowingPolicy : public Policy {
 public:
  std::vector<std::string> propose(const StateRecord&, int) const override { throw PolicyError("offline"); }
};

class GarbagePolicy : public Policy {
 public:
  std::vector<std::string> propose(const StateRecord&, int k) const override {
    return std::vector<std::string>(static_cast<std::size_t>(k), "I am not following the format");
  }
};

ToolRegistry mutated_registry(std::uint64_t seed = 11) {
  MutationPlan p;
  p.seed = seed;
  return mutate_registry(builtin_registry(), p);
}

}  // namespace

TEST(Puct, ArithmeticOracle) {
  EXPECT_NEAR(puct_score(8, plain_node(0.5, 1, 0.2), 1.25), 0.5 + 1.25 * 0.2 * std::sqrt(8.0) / 2.0, 1e-15);
  EXPECT_NEAR(puct_score(8, plain_node(0.5, 1, 0.2), 1.25), 0.8535533906, 1e-10);
  EXPECT_DOUBLE_EQ(puct_score(4, plain_node(0, 0, 1), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(puct_score(0, plain_node(-0.25, 7, 0.2), 1.25), -0.25);
}

TEST(Puct, SelectionPrefersUnvisitedAndBreaksTiesLow) {
  TreeNode a = plain_node(0, 0, 0.2), b = plain_node(0, 3, 0.2);
  EXPECT_EQ(select_among(3, {&b, &a}, 1.25), 1u);
  EXPECT_EQ(select_among(3, {&a, &b}, 1.25), 0u);
  TreeNode c = a;
  EXPECT_EQ(select_among(5, {&a, &c}, 1.25), 0u);
  EXPECT_FALSE(select_among(5, {}, 1.25));
}

TEST(Backprop, ExamplesAndRootToLeafPath) {
  SearchTree t;
  t.nodes.resize(3);
  t.nodes[1].id = 1;
  t.nodes[1].parent = 0;
  t.nodes[2].id = 2;
  t.nodes[2].parent = 1;
  backpropagate(t, 2, 1);
  EXPECT_DOUBLE_EQ(t.node(2).q, 1.0);
  EXPECT_EQ(t.node(2).visits, 1);
  backpropagate(t, 2, -1);
  EXPECT_DOUBLE_EQ(t.node(2).q, 0.0);
  EXPECT_EQ(t.node(2).visits, 2);
  backpropagate(t, 1, -1);
  EXPECT_EQ(t.node(0).visits, 3);
  EXPECT_NEAR(t.node(0).q, -1.0 / 3.0, 1e-15);
  EXPECT_EQ(t.node(2).visits, 2);
}

TEST(Backprop, IncrementalMeanMatchesBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    SearchTree t;
    t.nodes.resize(1);
    std::vector<std::vector<double>> seen(1);
    std::size_t n = 1 + rng.index(20);
    for (std::size_t i = 1; i < n; ++i) {
      TreeNode node;
      node.id = static_cast<int>(i);
      node.parent = static_cast<int>(rng.index(i));
      t.nodes.push_back(node);
      seen.emplace_back();
    }
    std::size_t updates = rng.index(60);
    for (std::size_t u = 0; u < updates; ++u) {
      int id = static_cast<int>(rng.index(n));
      double r = rng.coin() ? 1.0 : -1.0;
      backpropagate(t, id, r);
      for (std::optional<int> cur = id; cur; cur = t.node(*cur).parent) seen[static_cast<std::size_t>(*cur)].push_back(r);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rs = seen[i];
      EXPECT_EQ(t.nodes[i].visits, static_cast<long>(rs.size()));
      double mean = rs.empty() ? 0.0 : std::accumulate(rs.begin(), rs.end(), 0.0) / static_cast<double>(rs.size());
      EXPECT_NEAR(t.nodes[i].q, mean, 1e-12);
      EXPECT_LE(std::abs(t.nodes[i].q), 1.0);
    }
  }
}

TEST(SearchSteps, FreshTreeSelectsTheRoot) {
  auto tree = fresh_tree(root_for("coffee-easy-1"));
  Search s(tree, builtin_registry(), adaptive());
  EXPECT_EQ(s.select_leaf(), 0);
}

TEST(SearchSteps, ExpandMakesKChildrenWithUniformPriors) {
  auto tree = fresh_tree(root_for("coffee-easy-1"));
  auto reg = builtin_registry();
  Search s(tree, reg, adaptive());
  auto kids = s.expand(0);
  ASSERT_EQ(kids.size(), 5u);
  EXPECT_EQ(tree.stats.policy_calls, 1);
  double total = 0;
  for (int c : kids) {
    const auto& n = tree.node(c);
    EXPECT_DOUBLE_EQ(n.prior, 0.2);
    EXPECT_EQ(n.q, 0.0);
    EXPECT_EQ(n.visits, 0);
    EXPECT_EQ(n.depth, 1);
    EXPECT_FALSE(n.cached);
    ASSERT_TRUE(n.action);
    EXPECT_EQ(n.action->observation, invoke(reg, "LoadDB", KvMap{{"DBName", "coffee"}}).text);
    total += n.prior;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(SearchSteps, RolloutCachesAndExpandReusesWithoutAPolicyCall) {
  auto tree = fresh_tree(root_for("coffee-easy-1"));
  auto reg = builtin_registry();
  Search s(tree, reg, adaptive());
  auto kids = s.expand(0);
  int reward = s.simulate_cached(kids[0]);
  EXPECT_EQ(reward, 1);
  long calls = tree.stats.policy_calls;
  EXPECT_GT(calls, 1);
  const auto cached_ids = tree.node(kids[0]).children;
  ASSERT_EQ(cached_ids.size(), 5u);
  for (int c : cached_ids) EXPECT_TRUE(tree.node(c).cached);
  EXPECT_EQ(s.simulate_cached(kids[0]), reward);
  EXPECT_EQ(tree.stats.policy_calls, calls);
  auto reused = s.expand(kids[0]);
  EXPECT_EQ(reused, cached_ids);
  EXPECT_EQ(tree.stats.policy_calls, calls);
  EXPECT_EQ(tree.stats.cache_hits, 1);
  for (int c : reused) EXPECT_FALSE(tree.node(c).cached);
}

TEST(SearchSteps, RolloutPastTheDepthLimitFails) {
  SearchConfig c;
  c.max_depth = 1;
  auto tree = fresh_tree(root_for("coffee-easy-1"), c);
  Search s(tree, builtin_registry(), adaptive());
  auto kids = s.expand(0);
  EXPECT_EQ(s.simulate_cached(kids[0]), -1);
  EXPECT_TRUE(tree.node(kids[0]).children.empty());
}

TEST(SearchSteps, ReflectiveExpansionAtADeprecationLeaf) {
  auto reg = with_deprecated_loaddb();
  auto tree = fresh_tree(root_for("coffee-easy-1"));
  Search s(tree, reg, adaptive());
  auto kids = s.expand(0);
  EXPECT_EQ(tree.node(kids[0]).observation_kind, ObservationKind::deprecation_error);
  EXPECT_FALSE(tree.node(kids[0]).terminal);
  auto next = s.expand(kids[0]);
  ASSERT_FALSE(next.empty());
  const auto& n = tree.node(next[0]);
  EXPECT_EQ(n.action->action_name, "InitializeDatabase");
  EXPECT_EQ(n.observation_kind, ObservationKind::response);
  EXPECT_EQ(n.action->observation, invoke(reg, "InitializeDatabase", KvMap{{"DatabaseName", "coffee"}}).text);
}

TEST(SearchSteps, SelectionNeverReturnsCachedNodes) {
  auto reg = mutated_registry();
  SearchConfig c;
  c.max_simulations = 60;
  auto tree = fresh_tree(root_for("agenda-hard-2"), c);
  Search s(tree, reg, adaptive());
  for (int i = 0; i < 60; ++i) {
    auto leaf = s.select_leaf();
    if (!leaf) break;
    EXPECT_FALSE(tree.node(*leaf).cached);
    EXPECT_TRUE(s.open_leaves().count(*leaf));
    if (!s.step()) break;
  }
}

TEST(SearchSteps, PolicyFailureMakesAFailedTerminal) {
  ThrowingPolicy bad;
  auto tree = run_search(root_for("coffee-easy-1"), builtin_registry(), bad, SearchConfig{});
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_TRUE(tree.node(0).terminal);
  EXPECT_EQ(tree.node(0).reward, -1);
  ASSERT_TRUE(tree.node(0).failure);
  EXPECT_NE(tree.node(0).failure->find("offline"), std::string::npos);
  EXPECT_EQ(tree.stats.iterations, 1);
  EXPECT_EQ(tree.node(0).visits, 1);
  EXPECT_TRUE(check_tree(tree).empty());
}

TEST(SearchSteps, UnparseableCandidatesBecomeFailedChildren) {
  GarbagePolicy garbage;
  auto tree = run_search(root_for("coffee-easy-1"), builtin_registry(), garbage, SearchConfig{});
  ASSERT_EQ(tree.nodes.size(), 6u);
  for (int c : tree.node(0).children) {
    EXPECT_TRUE(tree.node(c).terminal);
    EXPECT_EQ(tree.node(c).reward, -1);
    EXPECT_NE(tree.node(c).failure->find("Thought"), std::string::npos);
  }
  EXPECT_FALSE(has_success(tree));
  EXPECT_TRUE(check_tree(tree).empty());
}

TEST(RunSearch, AdaptiveSucceedsOnEveryTaskBaseAndMutated) {
  auto base = builtin_registry();
  auto mutated = mutated_registry();
  for (const auto& t : builtin_tasks()) {
    auto a = run_search(root_for(t), base, adaptive(), SearchConfig{});
    EXPECT_TRUE(has_success(a)) << t.id;
    auto b = run_search(root_for(t), mutated, adaptive(), SearchConfig{});
    EXPECT_TRUE(has_success(b)) << t.id;
    EXPECT_TRUE(check_tree(b).empty()) << t.id;
  }
}

TEST(RunSearch, RigidNeverSucceedsOnAMutatedRegistry) {
  for (std::uint64_t seed : {3u, 11u, 29u}) {
    auto reg = mutated_registry(seed);
    for (const auto& t : builtin_tasks()) {
      auto tree = run_search(root_for(t), reg, rigid(), SearchConfig{});
      EXPECT_FALSE(has_success(tree)) << t.id << " seed " << seed;
    }
  }
}

TEST(RunSearch, StructuralInvariants) {
  auto reg = mutated_registry();
  SearchConfig c;
  c.max_simulations = 40;
  c.max_depth = 6;
  for (const auto& t : builtin_tasks()) {
    auto tree = run_search(root_for(t), reg, adaptive(), c);
    auto violations = check_tree(tree);
    EXPECT_TRUE(violations.empty()) << t.id << ": " << (violations.empty() ? "" : violations[0]);
    EXPECT_EQ(tree.node(0).visits, tree.stats.iterations);
    for (const auto& n : tree.nodes) {
      if (!n.cached) {
        EXPECT_LE(n.depth, c.max_depth);
      }
      EXPECT_EQ(n.terminal, n.reward.has_value());
      EXPECT_GE(n.q, -1.0);
      EXPECT_LE(n.q, 1.0);
    }
  }
}

TEST(RunSearch, SerializationRoundTripsAndIsByteStable) {
  auto reg = mutated_registry();
  auto tree = run_search(root_for("flights-hard-2"), reg, adaptive(), SearchConfig{}, "flights-hard-2_0");
  auto text = serialize_tree(tree);
  auto back = parse_tree(text);
  EXPECT_EQ(back, tree);
  EXPECT_EQ(serialize_tree(back), text);
  auto again = run_search(root_for("flights-hard-2"), reg, adaptive(), SearchConfig{}, "flights-hard-2_0");
  EXPECT_EQ(serialize_tree(again), text);
  EXPECT_THROW(parse_tree("{}"), FormatError);
  EXPECT_THROW(parse_tree("not json"), FormatError);
}

TEST(RunSearch, CachingNeverCostsMorePolicyCalls) {
  auto reg = mutated_registry();
  for (const auto& t : builtin_tasks()) {
    SearchConfig with;
    SearchConfig without;
    without.use_cache = false;
    auto a = run_search(root_for(t), reg, adaptive(), with);
    auto b = run_search(root_for(t), reg, adaptive(), without);
    EXPECT_LE(a.stats.policy_calls, b.stats.policy_calls) << t.id;
    for (const auto& n : b.nodes) EXPECT_FALSE(n.cached);
  }
}

TEST(Ablation, NoSelfReflectionEndsPathsOnInvocationErrors) {
  ScriptedPolicy semi(ScriptMode::semi_adaptive, builtin_plans());
  SearchConfig c;
  c.adapt.no_self_reflection = true;
  auto tree = run_search(root_for("coffee-easy-1"), builtin_registry(), semi, c);
  for (int k : tree.node(0).children) {
    EXPECT_TRUE(tree.node(k).terminal);
    EXPECT_EQ(tree.node(k).observation_kind, ObservationKind::invocation_error);
  }
  EXPECT_FALSE(has_success(tree));
  auto full = run_search(root_for("coffee-easy-1"), builtin_registry(), semi, SearchConfig{});
  EXPECT_TRUE(has_success(full));
}

TEST(Ablation, NoToolUpdateKeepsTheManualFixed) {
  auto reg = mutated_registry();
  SearchConfig c;
  c.adapt.no_tool_update = true;
  auto root = root_for("agenda-easy-1", false);
  auto tree = run_search(root, reg, adaptive(), c);
  for (const auto& n : tree.nodes) {
    EXPECT_EQ(state_at(tree, n.id).tool_manual, root.tool_manual);
    if (n.action) {
      EXPECT_NE(n.action->action_name, "UpdateTool");
    }
  }
  EXPECT_TRUE(has_success(tree));
  StateRecord s = root;
  ActionRecord upd{"t", "UpdateTool", KvMap{{"newtool_desc", "X[y], new."}}, std::nullopt};
  EXPECT_EQ(execute_action(s, upd, reg, c.adapt).kind, ObservationKind::invocation_error);
}

TEST(Isolation, ManualUpdatesStayOnTheirOwnPath) {
  auto reg = mutated_registry();
  auto root = root_for("coffee-hard-1");
  auto tree = run_search(root, reg, adaptive(), SearchConfig{});
  bool saw_update = false;
  for (const auto& n : tree.nodes) {
    std::size_t updates = 0;
    std::set<std::string> added;
    for (const ActionRecord* st : path_steps(tree, n.id)) {
      if (st->action_name == kUpdateTool && st->observation == std::string(kToolUpdatedMessage))
        added.insert(kv_text(st->action_input["newtool_desc"]));
    }
    updates = added.size();
    saw_update = saw_update || updates > 0;
    EXPECT_EQ(state_at(tree, n.id).tool_manual.size(), root.tool_manual.size() + updates) << n.path;
  }
  EXPECT_TRUE(saw_update);
  EXPECT_EQ(tree.root_state.tool_manual, root.tool_manual);
}

TEST(Config, ValidationAndJson) {
  SearchConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.c_puct, 1.25);
  EXPECT_EQ(c.max_depth, 15);
  EXPECT_EQ(c.k, 5);
  EXPECT_EQ(c.trees_per_task, 20);
  using Edit = void (*)(SearchConfig&);
  for (Edit bad : std::initializer_list<Edit>{[](SearchConfig& x) { x.c_puct = 0; }, [](SearchConfig& x) { x.max_depth = 0; },
                   [](SearchConfig& x) { x.k = 0; }, [](SearchConfig& x) { x.max_simulations = 0; },
                   [](SearchConfig& x) { x.trees_per_task = 0; }}) {
    SearchConfig b;
    bad(b);
    EXPECT_THROW(validate(b), ConfigError);
    EXPECT_THROW(run_search(root_for("coffee-easy-1"), builtin_registry(), adaptive(), b), ConfigError);
  }
  c.rng_seed = 0xFFFFFFFFFFFFFFFFull;
  c.adapt.no_tool_update = true;
  EXPECT_EQ(search_config_from_json(to_json(c)), c);
  EXPECT_NE(tree_seed(1, "a", 0), tree_seed(1, "a", 1));
  EXPECT_NE(tree_seed(1, "a", 0), tree_seed(1, "b", 0));
}
