#pragma once

// Batch commands behind the tooldrift executable.
//
// Manifest (INI):
//
//   [run]
//   corpus = builtin              ; or a task-list JSON path
//   base_registry = builtin       ; or a registry JSON path
//   settings = consistent, mutated_in, mutated_ood
//   output_dir = out
//   jobs = 1
//   csv = true
//
//   [mutated_in]                  ; one plan section per mutated setting
//   seed = 11
//   kinds = name_text, param_text, param_format, response_format
//
//   [synonyms]                    ; optional, shared by all plans
//
//   [policy]
//   kind = scripted_adaptive      ; scripted_rigid, scripted_semi_adaptive, remote
//   endpoint = http://127.0.0.1:8000/complete
//   temperature = 0.7
//   request_timeout_ms = 30000
//   max_in_flight = 4
//
//   [search]
//   c_puct = 1.25
//   max_depth = 15
//   k = 5
//   max_simulations = 30
//   trees_per_task = 20
//   rng_seed = 0
//   use_cache = true
//   no_tool_update = false
//   no_self_reflection = false
//
// Relative paths resolve against the manifest's directory.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tooldrift/corpus.hpp"
#include "tooldrift/env.hpp"
#include "tooldrift/mcts.hpp"
#include "tooldrift/mutation.hpp"
#include "tooldrift/policy.hpp"
#include "tooldrift/remote_policy.hpp"
#include "tooldrift/trajectory.hpp"

namespace tooldrift {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitConfig = 2, kExitIo = 3, kExitInvariant = 4 };

class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline ToolRegistry load_registry(const std::string& where) {
  if (where.empty() || where == "builtin") return builtin_registry();
  return parse_registry(read_file(where));
}

inline std::vector<TaskInstance> load_tasks(const std::string& where) {
  if (where.empty() || where == "builtin") return builtin_tasks();
  return parse_tasks(read_file(where));
}

// ---------------------------------------------------------------------------
// Manifest

inline constexpr const char* kSettings[] = {"consistent", "mutated_in", "mutated_ood"};

struct RunManifest {
  std::string corpus = "builtin";
  std::string base_registry = "builtin";
  std::vector<std::string> settings{"consistent"};
  std::map<std::string, MutationPlan> plans;
  PolicyConfig policy;
  SearchConfig search;
  fs::path output_dir = "out";
  int jobs = 1;
  bool csv = true;
};

namespace detail {

template <typename T>
T get_or(const boost::property_tree::ptree& t, const std::string& key, T fallback) {
  auto child = t.get_child_optional(key);
  if (!child) return fallback;
  auto value = child->template get_value_optional<T>();
  if (!value) throw ConfigError("manifest key '" + key + "' has an invalid value '" + child->data() + "'");
  return *value;
}

inline std::string resolve_path(const fs::path& base, const std::string& p) {
  if (p.empty() || p == "builtin") return p;
  fs::path path(p);
  return path.is_absolute() ? path.string() : (base / path).lexically_normal().string();
}

}  // namespace detail

inline RunManifest parse_manifest(const std::string& text, const fs::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ptree_error& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  RunManifest m;
  const pt::ptree empty;
  const auto& run = tree.get_child("run", empty);
  m.corpus = detail::resolve_path(base_dir, detail::get_or<std::string>(run, "corpus", "builtin"));
  m.base_registry = detail::resolve_path(base_dir, detail::get_or<std::string>(run, "base_registry", "builtin"));
  m.settings = detail::split_list(detail::get_or<std::string>(run, "settings", "consistent"));
  if (m.settings.empty()) throw ConfigError("manifest lists no settings");
  m.output_dir = detail::resolve_path(base_dir, detail::get_or<std::string>(run, "output_dir", "out"));
  m.jobs = detail::get_or<int>(run, "jobs", 1);
  if (m.jobs < 1) throw ConfigError("jobs must be positive");
  m.csv = detail::get_or<bool>(run, "csv", true);

  auto synonyms = tree.get_child_optional("synonyms");
  for (const auto& s : m.settings) {
    if (std::find(std::begin(kSettings), std::end(kSettings), s) == std::end(kSettings)) {
      throw ConfigError("unknown setting '" + s + "'");
    }
    if (s == "consistent") continue;
    auto section = tree.get_child_optional(s);
    if (!section) throw ConfigError("setting '" + s + "' needs a [" + s + "] mutation plan");
    try {
      m.plans[s] = plan_from_config(*section, synonyms ? &*synonyms : nullptr);
    } catch (const MutationError& e) {
      throw ConfigError("[" + s + "]: " + e.what());
    }
  }

  const auto& pol = tree.get_child("policy", empty);
  try {
    m.policy.kind = policy_kind_from_string(detail::get_or<std::string>(pol, "kind", "scripted_adaptive"));
    if (auto ep = pol.get_optional<std::string>("endpoint"); ep && !ep->empty()) m.policy.endpoint = *ep;
    m.policy.temperature = detail::get_or<double>(pol, "temperature", 0.7);
    m.policy.request_timeout = std::chrono::milliseconds(detail::get_or<long>(pol, "request_timeout_ms", 30000));
    m.policy.max_in_flight = detail::get_or<int>(pol, "max_in_flight", 4);
    m.policy.max_retries = detail::get_or<int>(pol, "max_retries", 2);
    validate(m.policy);
  } catch (const PolicyError& e) {
    throw ConfigError(std::string("[policy]: ") + e.what());
  }

  const auto& se = tree.get_child("search", empty);
  m.search.c_puct = detail::get_or<double>(se, "c_puct", 1.25);
  m.search.max_depth = detail::get_or<int>(se, "max_depth", 15);
  m.search.k = detail::get_or<int>(se, "k", 5);
  m.search.max_simulations = detail::get_or<int>(se, "max_simulations", 30);
  m.search.trees_per_task = detail::get_or<int>(se, "trees_per_task", 20);
  m.search.rng_seed = detail::get_or<std::uint64_t>(se, "rng_seed", 0);
  m.search.use_cache = detail::get_or<bool>(se, "use_cache", true);
  m.search.adapt.no_tool_update = detail::get_or<bool>(se, "no_tool_update", false);
  m.search.adapt.no_self_reflection = detail::get_or<bool>(se, "no_self_reflection", false);
  m.policy.max_candidates = m.search.k;
  validate(m.search);
  return m;
}

inline RunManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

// ---------------------------------------------------------------------------
// corpus

inline void cmd_corpus(const fs::path& out_dir, std::ostream& log) {
  write_file(out_dir / "base_registry.json", serialize_registry(builtin_registry()));
  write_file(out_dir / "tasks.json", serialize_tasks(builtin_tasks()));
  log << "wrote " << (out_dir / "base_registry.json").string() << " and " << (out_dir / "tasks.json").string()
      << "\n";
}

// ---------------------------------------------------------------------------
// mutate

inline std::string deprecation_map_json(const ToolRegistry& r) {
  OrderedJson j;
  j["schema"] = "tooldrift.deprecations/v1";
  j["generation"] = r.generation;
  OrderedJson deps = OrderedJson::object();
  for (const auto& [old, d] : r.deprecated) {
    deps[old] = {{"successor", d.api.replaced_by.value_or("")}, {"param_example", d.param_example}};
  }
  j["deprecated"] = std::move(deps);
  return j.dump(2) + "\n";
}

inline fs::path deprecation_map_path(const fs::path& registry_path) {
  fs::path p = registry_path;
  p.replace_extension(".deprecations.json");
  return p;
}

/// Returns the exit code (kExitInvariant when verification fails).
inline int cmd_mutate(const std::string& base_path, const MutationPlan& plan, const fs::path& out_path,
                      std::ostream& log) {
  ToolRegistry base = load_registry(base_path);
  ToolRegistry mutated;
  try {
    mutated = mutate_registry(base, plan);
  } catch (const MutationError& e) {
    throw CommandError(kExitConfig, e.what());
  }
  auto report = verify_mutation(base, mutated);
  write_file(out_path, serialize_registry(mutated));
  write_file(deprecation_map_path(out_path), deprecation_map_json(mutated));
  log << "generation " << mutated.generation << ": " << mutated.deprecated.size() << " deprecated, "
      << report.probes_run << " probes\n";
  for (const auto& [old, d] : mutated.deprecated) log << "  " << old << " -> " << d.api.replaced_by.value_or("?") << "\n";
  if (!report.ok()) {
    for (const auto& v : report.violations) log << "violation: " << v << "\n";
    return kExitInvariant;
  }
  log << "verify: ok\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// search

struct SummaryRow {
  std::string dataset;
  Difficulty difficulty = Difficulty::easy;
  std::vector<double> success;  // per setting, in percent
};

struct SummaryTable {
  std::vector<std::string> settings;
  std::vector<SummaryRow> rows;
};

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string render_summary(const SummaryTable& t) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"dataset", "difficulty"};
  for (const auto& s : t.settings) header.push_back(s);
  cells.push_back(header);
  for (const auto& r : t.rows) {
    std::vector<std::string> line{r.dataset, std::string(to_string(r.difficulty))};
    for (double v : r.success) line.push_back(percent(v));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  std::string out;
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out += line[i];
      if (i + 1 < line.size()) out += std::string(width[i] - line[i].size() + 2, ' ');
    }
    out += "\n";
  }
  return out;
}

inline std::string summary_csv(const SummaryTable& t) {
  std::string out = "dataset,difficulty";
  for (const auto& s : t.settings) out += "," + s;
  out += "\n";
  for (const auto& r : t.rows) {
    out += r.dataset + "," + std::string(to_string(r.difficulty));
    for (double v : r.success) out += "," + percent(v);
    out += "\n";
  }
  return out;
}

struct SearchJob {
  std::size_t setting = 0;
  std::size_t task = 0;
  int index = 0;
};

inline SummaryTable cmd_search(const RunManifest& m, std::ostream& log) {
  ToolRegistry base = load_registry(m.base_registry);
  std::vector<TaskInstance> tasks = load_tasks(m.corpus);
  if (tasks.empty()) throw CommandError(kExitConfig, "task corpus is empty");

  std::vector<ToolRegistry> deployed;
  for (const auto& s : m.settings) {
    if (s == "consistent") {
      deployed.push_back(base);
    } else {
      ToolRegistry r;
      try {
        r = mutate_registry(base, m.plans.at(s));
      } catch (const MutationError& e) {
        throw CommandError(kExitConfig, "[" + s + "]: " + e.what());
      }
      auto report = verify_mutation(base, r);
      if (!report.ok()) throw CommandError(kExitInvariant, "[" + s + "] mutation fails verification: " + report.violations.front());
      deployed.push_back(std::move(r));
    }
    write_file(m.output_dir / "registries" / (s + ".json"), serialize_registry(deployed.back()));
  }

  std::unique_ptr<Policy> policy;
  try {
    policy = make_policy(m.policy, builtin_plans());
  } catch (const PolicyError& e) {
    throw CommandError(kExitConfig, e.what());
  }

  std::vector<StateRecord> roots;
  for (const auto& t : tasks) roots.push_back(initial_state(t, base, builtin_demos(), !m.search.adapt.no_tool_update));

  std::vector<SearchJob> jobs;
  for (std::size_t s = 0; s < m.settings.size(); ++s)
    for (std::size_t t = 0; t < tasks.size(); ++t)
      for (int i = 0; i < m.search.trees_per_task; ++i) jobs.push_back({s, t, i});

  std::vector<char> success(jobs.size(), 0);
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto& job = jobs[j];
      try {
        SearchConfig cfg = m.search;
        cfg.rng_seed = tree_seed(m.search.rng_seed, tasks[job.task].id, job.index);
        std::string id = tasks[job.task].id + "_" + std::to_string(job.index);
        SearchTree tree = run_search(roots[job.task], deployed[job.setting], *policy, cfg, id);
        success[j] = has_success(tree) ? 1 : 0;
        write_file(m.output_dir / "trees" / m.settings[job.setting] / (id + ".json"), serialize_tree(tree));
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
  };
  int n_threads = std::min<int>(m.jobs, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) {
      log << "task " << tasks[jobs[j].task].id << " tree " << jobs[j].index << " (" << m.settings[jobs[j].setting]
          << ") failed: " << errors[j] << "\n";
    }
  }

  SummaryTable table;
  table.settings = m.settings;
  std::vector<std::pair<std::string, Difficulty>> keys;
  for (const auto& t : tasks) {
    std::pair<std::string, Difficulty> key{t.dataset, t.difficulty};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [dataset, diff] : keys) {
    SummaryRow row{dataset, diff, {}};
    for (std::size_t s = 0; s < m.settings.size(); ++s) {
      long hit = 0, total = 0;
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& t = tasks[jobs[j].task];
        if (jobs[j].setting != s || t.dataset != dataset || t.difficulty != diff) continue;
        ++total;
        hit += success[j];
      }
      row.success.push_back(total ? 100.0 * static_cast<double>(hit) / static_cast<double>(total) : 0.0);
    }
    table.rows.push_back(std::move(row));
  }

  std::string text = render_summary(table);
  write_file(m.output_dir / "summary.txt", text);
  if (m.csv) write_file(m.output_dir / "summary.csv", summary_csv(table));
  log << text;
  return table;
}

// ---------------------------------------------------------------------------
// export

inline std::vector<fs::path> tree_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::size_t cmd_export(const fs::path& tree_dir, const fs::path& out_path, std::size_t max_per_task,
                              std::uint64_t seed, bool include_failed, std::ostream& log) {
  std::map<std::pair<std::string, std::string>, std::vector<Trajectory>> groups;
  for (const auto& file : tree_files(tree_dir)) {
    SearchTree tree = parse_tree(read_file(file));
    auto found = extract_successful(tree, static_cast<std::size_t>(-1), seed, include_failed);
    auto& g = groups[{tree.registry_generation, tree.root_state.task.id}];
    for (auto& t : found) g.push_back(std::move(t));
  }
  std::vector<Trajectory> chosen;
  for (auto& [key, list] : groups) {
    auto kept = subsample(std::move(list), max_per_task, mix_seed(seed, key.first + "/" + key.second));
    for (auto& t : kept) chosen.push_back(std::move(t));
  }
  std::error_code ec;
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path(), ec);
  std::size_t n = export_sft(chosen, out_path.string());
  log << "exported " << n << " trajectories from " << groups.size() << " task groups to " << out_path.string() << "\n";
  return n;
}

// ---------------------------------------------------------------------------
// inspect

struct InspectResult {
  std::string text;
  std::vector<std::string> violations;
};

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline InspectResult inspect_tree(const SearchTree& tree) {
  InspectResult out;
  std::vector<char> on_success(tree.nodes.size(), 0);
  for (const auto& n : tree.nodes) {
    if (!(n.terminal && n.reward == 1)) continue;
    for (std::optional<int> cur = n.id; cur; cur = tree.node(*cur).parent) on_success[static_cast<std::size_t>(*cur)] = 1;
  }
  std::ostringstream os;
  os << "tree " << tree.tree_id << "  task " << tree.root_state.task.id << "  generation " << tree.registry_generation
     << "  nodes " << tree.nodes.size() << "  iterations " << tree.stats.iterations << "  policy_calls "
     << tree.stats.policy_calls << "\n";
  std::vector<std::pair<int, int>> stack;  // (id, indent)
  if (!tree.nodes.empty()) stack.push_back({0, 0});
  while (!stack.empty()) {
    auto [id, indent] = stack.back();
    stack.pop_back();
    const TreeNode& n = tree.node(id);
    os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << "[" << n.id << "] ";
    if (n.action) {
      os << n.action->action_name << " -> "
         << (n.observation_kind ? to_string(classify(Observation{*n.observation_kind, {}, {}})) : "unexecuted");
    } else if (n.parent) {
      os << "(unparsed)";
    } else {
      os << "root";
    }
    os << "  d=" << n.depth << " N=" << n.visits << " Q=" << fixed3(n.q) << " P=" << fixed3(n.prior);
    if (n.terminal) os << " [terminal r=" << (n.reward == 1 ? "+1" : "-1") << "]";
    if (n.cached) os << " [cached]";
    if (on_success[static_cast<std::size_t>(n.id)]) os << " [+1 path]";
    if (n.failure) os << " [failure: " << *n.failure << "]";
    os << "\n";
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back({*it, indent + 1});
  }
  out.violations = check_tree(tree);
  for (const auto& v : out.violations) os << "VIOLATION: " << v << "\n";
  out.text = os.str();
  return out;
}

/// Returns the exit code (kExitInvariant when the tree violates invariants).
inline int cmd_inspect(const fs::path& tree_path, std::ostream& log) {
  SearchTree tree = parse_tree(read_file(tree_path));
  auto r = inspect_tree(tree);
  log << r.text;
  return r.violations.empty() ? kExitOk : kExitInvariant;
}

}  // namespace tooldrift
