// tooldrift command-line front-end: corpus, mutate, search, export, inspect.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tooldrift/commands.hpp"

namespace td = tooldrift;

int main(int argc, char** argv) {
  CLI::App app{"Tree search over drifting tool APIs"};
  app.require_subcommand(1);

  std::string corpus_out = "corpus";
  auto* corpus = app.add_subcommand("corpus", "Write the built-in base registry and task list");
  corpus->add_option("--out", corpus_out, "Output directory");

  std::string base = "builtin", plan_path, mutate_out;
  std::optional<std::uint64_t> seed_override;
  auto* mutate = app.add_subcommand("mutate", "Derive a mutated registry from a base registry");
  mutate->add_option("--base", base, "Base registry JSON, or 'builtin'");
  mutate->add_option("--plan", plan_path, "Mutation plan config ([mutation] section)")->required();
  mutate->add_option("--seed", seed_override, "Override the plan's seed");
  mutate->add_option("--out", mutate_out, "Output registry path")->required();

  std::string manifest_path;
  bool no_tool_update = false, no_self_reflection = false;
  std::optional<int> jobs;
  std::optional<std::string> search_out;
  auto* search = app.add_subcommand("search", "Run tree searches over every task and setting");
  search->add_option("--manifest", manifest_path, "Run manifest (INI)")->required();
  search->add_flag("--no-tool-update", no_tool_update, "Disable the UpdateTool system tool");
  search->add_flag("--no-self-reflection", no_self_reflection, "End paths at invocation errors");
  search->add_option("--jobs", jobs, "Worker threads");
  search->add_option("--out", search_out, "Override the output directory");

  std::string tree_dir, export_out;
  std::size_t max_per_task = 4;
  std::uint64_t export_seed = 0;
  bool include_failed = false;
  auto* exp = app.add_subcommand("export", "Export successful trajectories as SFT records");
  exp->add_option("--trees", tree_dir, "Directory of tree files")->required();
  exp->add_option("--out", export_out, "Output JSONL path")->required();
  exp->add_option("--max-per-task", max_per_task, "Trajectories kept per task");
  exp->add_option("--seed", export_seed, "Sampling seed");
  exp->add_flag("--include-failed", include_failed, "Also export -1 trajectories");

  std::string tree_path;
  auto* inspect = app.add_subcommand("inspect", "Print a tree file as an outline and check it");
  inspect->add_option("--tree", tree_path, "Tree JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? td::kExitOk : td::kExitConfig;
  }

  try {
    if (corpus->parsed()) {
      td::cmd_corpus(corpus_out, std::cout);
      return td::kExitOk;
    }
    if (mutate->parsed()) {
      td::MutationPlan plan;
      try {
        plan = td::parse_plan_config(td::read_file(plan_path));
      } catch (const td::MutationError& e) {
        throw td::ConfigError(e.what());
      }
      if (seed_override) plan.seed = *seed_override;
      return td::cmd_mutate(base, plan, mutate_out, std::cout);
    }
    if (search->parsed()) {
      td::RunManifest m = td::load_manifest(manifest_path);
      if (no_tool_update) m.search.adapt.no_tool_update = true;
      if (no_self_reflection) m.search.adapt.no_self_reflection = true;
      if (jobs) {
        if (*jobs < 1) throw td::ConfigError("--jobs must be positive");
        m.jobs = *jobs;
      }
      if (search_out) m.output_dir = *search_out;
      td::cmd_search(m, std::cout);
      return td::kExitOk;
    }
    if (exp->parsed()) {
      td::cmd_export(tree_dir, export_out, max_per_task, export_seed, include_failed, std::cout);
      return td::kExitOk;
    }
    if (inspect->parsed()) return td::cmd_inspect(tree_path, std::cout);
  } catch (const td::CommandError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code();
  } catch (const td::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return td::kExitConfig;
  } catch (const td::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return td::kExitIo;
  } catch (const td::FormatError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return td::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return td::kExitError;
  }
  return td::kExitError;
}
