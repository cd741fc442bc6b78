#pragma once

// Deterministic API mutation.
//
// mutate_registry() derives a new server-side registry generation from a
// base one by renaming APIs and parameters (word-level synonym substitution
// and special characters inserted at word boundaries), switching condition
// parameters between string and key-value form, and changing response
// formats. Every renamed API leaves a deprecation entry pointing at its
// successor. verify_mutation() re-checks those constraints and replays a
// probe suite to confirm behaviors survived the renaming.

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tooldrift/env.hpp"
#include "tooldrift/kv.hpp"
#include "tooldrift/rng.hpp"

namespace tooldrift {

enum class MutationKind { name_text, name_special_char, param_text, param_special_char, param_format, response_format };

inline constexpr MutationKind kAllMutationKinds[] = {
    MutationKind::name_text,          MutationKind::name_special_char, MutationKind::param_text,
    MutationKind::param_special_char, MutationKind::param_format,      MutationKind::response_format};

inline std::string_view to_string(MutationKind k) {
  switch (k) {
    case MutationKind::name_text: return "name_text";
    case MutationKind::name_special_char: return "name_special_char";
    case MutationKind::param_text: return "param_text";
    case MutationKind::param_special_char: return "param_special_char";
    case MutationKind::param_format: return "param_format";
    case MutationKind::response_format: return "response_format";
  }
  return "name_text";
}

class MutationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline MutationKind mutation_kind_from_string(std::string_view s) {
  for (auto k : kAllMutationKinds)
    if (to_string(k) == s) return k;
  throw MutationError("unknown mutation kind '" + std::string(s) + "'");
}

using SynonymTable = std::map<std::string, std::vector<std::string>>;

inline const SynonymTable& default_synonyms() {
  static const SynonymTable table = {
      {"Load", {"Initialize", "Open", "Fetch"}},
      {"DB", {"Database", "Dataset", "Store"}},
      {"Filter", {"Select", "Query", "Search"}},
      {"Get", {"Fetch", "Retrieve", "Read"}},
      {"Value", {"Field", "Entry", "Data"}},
      {"Calculate", {"Compute", "Evaluate", "Solve"}},
      {"Name", {"Title", "Label", "Key"}},
      {"Condition", {"Criteria", "Predicate", "Constraint"}},
      {"Column", {"Field", "Attribute", "Property"}},
      {"Formula", {"Expression", "Equation", "Math"}},
      {"Retrieve", {"Fetch", "Get", "Query"}},
      {"Agenda", {"Schedule", "Calendar", "Events"}},
      {"Data", {"Info", "Records", "Details"}},
      {"Fetch", {"Get", "Retrieve", "Load"}},
      {"Database", {"DB", "Dataset", "Store"}},
      {"Execute", {"Run", "Invoke"}},
      {"Python", {"Py", "Script"}},
      {"Code", {"Source", "Program"}},
  };
  return table;
}

struct MutationPlan {
  std::uint64_t seed = 0;
  std::set<MutationKind> kinds{std::begin(kAllMutationKinds), std::end(kAllMutationKinds)};
  char special_char = '_';
  SynonymTable synonym_table = default_synonyms();

  bool has(MutationKind k) const { return kinds.count(k) != 0; }
};

inline bool is_special_char(char c) { return c == '_' || c == '-' || c == '.'; }

/// Splits an identifier into words at special characters and CamelCase
/// boundaries: "LoadDB" -> {Load, DB}, "Fetch_Agenda_Data" -> {Fetch, Agenda, Data}.
inline std::vector<std::string> split_words(std::string_view name) {
  std::vector<std::string> words;
  std::string cur;
  auto up = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  auto low = [](char c) { return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)); };
  for (std::size_t i = 0; i < name.size(); ++i) {
    char c = name[i];
    if (is_special_char(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (!cur.empty() && up(c)) {
      char prev = cur.back();
      bool next_low = i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1]));
      if (low(prev) || (up(prev) && next_low)) {
        words.push_back(std::move(cur));
        cur.clear();
      }
    }
    cur += c;
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

/// Naming problems of one identifier under the CamelCase-with-separators
/// rules; empty when the name is acceptable.
inline std::vector<std::string> naming_violations(std::string_view name) {
  std::vector<std::string> out;
  if (name.empty()) return {"empty name"};
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && !is_special_char(c)) {
      out.push_back("'" + std::string(name) + "': invalid character '" + std::string(1, c) + "'");
      return out;
    }
  }
  std::vector<std::string> segments;
  std::string cur;
  for (char c : name) {
    if (is_special_char(c)) {
      segments.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  segments.push_back(cur);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.empty()) {
      out.push_back("'" + std::string(name) + "': special char not between words");
    } else if (!std::isupper(static_cast<unsigned char>(s.front()))) {
      out.push_back("'" + std::string(name) + "': " + (i == 0 ? "not CamelCase" : "special char inside word"));
    }
  }
  return out;
}

namespace detail {

inline bool valid_synonym(std::string_view w) {
  if (w.empty() || !std::isupper(static_cast<unsigned char>(w.front()))) return false;
  return std::all_of(w.begin(), w.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

inline std::string join_words(const std::vector<std::string>& words, Rng* rng, char special) {
  std::string out;
  if (words.empty()) return out;
  std::vector<bool> insert(words.size() > 1 ? words.size() - 1 : 0, false);
  if (rng && !insert.empty()) {
    bool any = false;
    for (std::size_t i = 0; i < insert.size(); ++i) {
      insert[i] = rng->coin();
      any = any || insert[i];
    }
    if (!any) insert[rng->index(insert.size())] = true;
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0 && insert[i - 1]) out += special;
    out += words[i];
  }
  return out;
}

inline std::vector<std::string> substitute(const std::vector<std::string>& words, const SynonymTable& table,
                                           Rng& rng, std::string_view owner) {
  std::vector<std::string> out;
  for (const auto& w : words) {
    auto it = table.find(w);
    std::vector<std::string> options;
    if (it != table.end()) {
      for (const auto& s : it->second)
        if (s != w) options.push_back(s);
    }
    if (options.empty()) {
      throw MutationError("synonym table has no entry for word '" + w + "' (in '" + std::string(owner) + "')");
    }
    out.push_back(options[rng.index(options.size())]);
  }
  return out;
}

inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Whole-identifier replacement inside free text.
inline std::string replace_identifiers(const std::string& text, const std::map<std::string, std::string>& renames) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (ident_char(text[i]) && (i == 0 || !ident_char(text[i - 1]))) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      std::string word = text.substr(i, j - i);
      auto it = renames.find(word);
      out += it == renames.end() ? word : it->second;
      i = j;
    } else {
      out += text[i++];
    }
  }
  return out;
}

inline std::string conditions_text_to_map(const std::string& text) {
  KvMap m = KvMap::object();
  auto terms = split_condition_terms(text);
  for (std::size_t i = 0; i < terms.size(); ++i) m["condition" + std::to_string(i + 1)] = terms[i];
  return render_kv(m);
}

inline std::string conditions_map_to_text(const std::string& map_text) {
  KvMap m = parse_kv_map(map_text);
  std::string out;
  for (const auto& [k, v] : m.items()) {
    if (!out.empty()) out += ", ";
    out += kv_text(v);
  }
  return out;
}

}  // namespace detail

/// Converts a call's argument map from one contract to another. Arguments
/// are matched by position; condition values switch between the string form
/// and the {"condition1": ...} form as the target parameter kind requires.
inline KvMap convert_args(const KvMap& args, const std::vector<ApiParam>& target) {
  KvMap out = KvMap::object();
  std::size_t i = 0;
  for (const auto& [key, value] : args.items()) {
    if (i >= target.size()) break;
    const ApiParam& p = target[i++];
    if (p.kind == ValueKind::map && value.is_string()) {
      out[p.name] = parse_kv_map(detail::conditions_text_to_map(value.get<std::string>()));
    } else if (p.kind != ValueKind::map && value.is_object()) {
      std::string joined;
      for (const auto& [k, v] : value.items()) {
        if (!joined.empty()) joined += ", ";
        joined += kv_text(v);
      }
      out[p.name] = joined;
    } else {
      out[p.name] = value;
    }
  }
  return out;
}

inline ToolRegistry mutate_registry(const ToolRegistry& base, const MutationPlan& plan) {
  if (plan.kinds.empty()) throw MutationError("mutation plan has no kinds");
  if (!is_special_char(plan.special_char)) {
    throw MutationError("special_char must be one of _ - . (got '" + std::string(1, plan.special_char) + "')");
  }
  for (const auto& [word, syns] : plan.synonym_table) {
    for (const auto& s : syns) {
      if (!detail::valid_synonym(s)) throw MutationError("synonym '" + s + "' for '" + word + "' is not a CamelCase word");
    }
  }
  if (!base.deprecated.empty()) throw MutationError("base registry already carries deprecations");
  if (std::none_of(base.apis.begin(), base.apis.end(), [](const ApiSpec& a) { return !a.is_system_tool; })) {
    throw MutationError("base registry has no non-system API to mutate");
  }

  std::set<std::string> base_names;
  for (const auto& a : base.apis) base_names.insert(a.name);

  ToolRegistry out;
  out.generation = base.generation + "+mut-" + std::to_string(plan.seed);
  out.world = base.world;

  std::set<std::string> taken;
  for (const auto& a : base.apis)
    if (a.is_system_tool) taken.insert(a.name);

  std::map<std::string, std::string> renames;  // API names, for descriptions
  std::vector<std::pair<ApiSpec, Binding>> mutated;
  std::vector<std::map<std::string, std::string>> param_renames;

  for (const auto& api : base.apis) {
    if (api.is_system_tool) continue;
    const Binding* bind = base.binding(api.name);
    if (!bind) throw MutationError("api '" + api.name + "' has no behavior binding");
    const BehaviorInfo* info = find_behavior(bind->behavior);
    Rng rng(mix_seed(plan.seed, api.name));

    ApiSpec next = api;
    Binding next_bind = *bind;
    std::map<std::string, std::string> own;

    for (std::size_t i = 0; i < next.params.size(); ++i) {
      auto& p = next.params[i];
      auto words = split_words(p.name);
      if (plan.has(MutationKind::param_text)) words = detail::substitute(words, plan.synonym_table, rng, p.name);
      std::string renamed =
          detail::join_words(words, plan.has(MutationKind::param_special_char) ? &rng : nullptr, plan.special_char);
      if (renamed != p.name) own[p.name] = renamed;
      p.name = renamed;
      bool condition_slot = info && i < info->slots.size() && info->slots[i] == SlotKind::conditions;
      if (plan.has(MutationKind::param_format) && condition_slot) {
        if (p.kind == ValueKind::map) {
          p.kind = ValueKind::text;
          p.example = detail::conditions_map_to_text(p.example);
        } else {
          p.kind = ValueKind::map;
          p.example = detail::conditions_text_to_map(p.example);
        }
      }
    }
    bool contract_changed = next.params != api.params;

    auto base_words = split_words(api.name);
    std::string name;
    for (int attempt = 0;; ++attempt) {
      auto words = base_words;
      // A changed parameter contract is always published under a new name so
      // that callers of the old name are told about it.
      if (plan.has(MutationKind::name_text) || contract_changed) {
        words = detail::substitute(words, plan.synonym_table, rng, api.name);
      }
      name = detail::join_words(words, plan.has(MutationKind::name_special_char) ? &rng : nullptr, plan.special_char);
      bool collides = taken.count(name) || (name != api.name && base_names.count(name));
      if (!collides) break;
      if (attempt >= 32) throw MutationError("could not find a collision-free name for '" + api.name + "'");
    }
    taken.insert(name);
    next.name = name;
    if (name != api.name) renames[api.name] = name;

    if (plan.has(MutationKind::response_format)) {
      std::vector<ResponseFormat> others;
      for (auto f : {ResponseFormat::sentence, ResponseFormat::json, ResponseFormat::labeled})
        if (f != bind->format) others.push_back(f);
      next_bind.format = others[rng.index(others.size())];
      next.response_note = response_note_for(next_bind.format, bind->behavior);
    }
    mutated.emplace_back(std::move(next), next_bind);
    param_renames.push_back(std::move(own));
  }

  // Rebuild in base order, with descriptions following the renames.
  std::size_t m = 0;
  for (const auto& api : base.apis) {
    if (api.is_system_tool) {
      out.apis.push_back(api);
      continue;
    }
    auto words = renames;
    for (const auto& [from, to] : param_renames[m]) words[from] = to;
    auto& [next, bind] = mutated[m++];
    next.description = detail::replace_identifiers(api.description, words);
    if (next.name != api.name) {
      ApiSpec old = api;
      old.replaced_by = next.name;
      out.deprecated[api.name] = Deprecation{std::move(old), render_kv(param_example(next))};
    }
    out.bindings[next.name] = bind;
    out.apis.push_back(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification

struct MutationReport {
  std::vector<std::string> violations;
  std::size_t probes_run = 0;

  bool ok() const { return violations.empty(); }
};

namespace detail {

/// Probe argument maps (in slot order) for a behavior over the given world.
inline std::vector<std::vector<std::string>> probe_slots(std::string_view behavior, const World& world) {
  std::vector<std::vector<std::string>> out;
  if (behavior == "calculate") {
    for (const char* f : {"1+2", "round(10/3, 2)", "abs(-4.5)", "(189.35-189.7)/189.7*100"}) out.push_back({f});
    return out;
  }
  for (const auto& [name, table] : world.tables) {
    if (behavior == "load_db") {
      out.push_back({name});
      continue;
    }
    if (table.rows.empty() || table.columns.size() < 2) continue;
    const auto& first = table.rows.front();
    const auto& last = table.rows.back();
    std::string c1 = table.columns[0] + "=" + first[0];
    std::string c2 = table.columns[0] + "=" + last[0] + ", " + table.columns[1] + "=" + last[1];
    if (behavior == "filter_db") {
      out.push_back({name, c1});
      out.push_back({name, c2});
      out.push_back({name, table.columns[0] + ">=" + first[0]});
    } else if (behavior == "get_value") {
      out.push_back({name, c1, table.columns.back()});
      out.push_back({name, c2, table.columns[1]});
    }
  }
  return out;
}

inline KvMap probe_args(const ApiSpec& api, const std::vector<std::string>& slots) {
  KvMap out = KvMap::object();
  for (std::size_t i = 0; i < api.params.size() && i < slots.size(); ++i) {
    const auto& p = api.params[i];
    if (p.kind == ValueKind::map) {
      out[p.name] = parse_kv_map(conditions_text_to_map(slots[i]));
    } else {
      out[p.name] = slots[i];
    }
  }
  return out;
}

}  // namespace detail

inline MutationReport verify_mutation(const ToolRegistry& base, const ToolRegistry& mutated) {
  MutationReport report;
  auto& v = report.violations;

  for (const auto& issue : validate_registry(mutated)) v.push_back("registry: " + issue);

  for (const auto& api : mutated.apis) {
    if (api.is_system_tool) continue;
    for (auto& n : naming_violations(api.name)) v.push_back("api name " + n);
    for (const auto& p : api.params)
      for (auto& n : naming_violations(p.name)) v.push_back("param name " + n);
  }

  for (const auto& api : base.apis) {
    if (!api.is_system_tool) continue;
    const ApiSpec* now = mutated.find(api.name);
    if (!now || !(*now == api)) v.push_back("system tool '" + api.name + "' changed");
  }

  for (const auto& api : base.apis) {
    if (api.is_system_tool) continue;
    const ApiSpec* successor = nullptr;
    auto dep = mutated.deprecated.find(api.name);
    if (dep != mutated.deprecated.end()) {
      if (mutated.find(api.name)) v.push_back("'" + api.name + "' is both deployed and deprecated");
      const auto& next = dep->second.api.replaced_by;
      successor = next ? mutated.find(*next) : nullptr;
      if (!successor) {
        v.push_back("'" + api.name + "' has no deployed successor");
        continue;
      }
      if (mutated.deprecated.count(successor->name)) v.push_back("'" + api.name + "' needs more than one hop");
      auto example = dep->second.param_example;
      if (example != render_kv(param_example(*successor))) {
        v.push_back("deprecation of '" + api.name + "' carries a stale param example");
      }
    } else {
      successor = mutated.find(api.name);
      if (!successor) {
        v.push_back("'" + api.name + "' is unreachable");
        continue;
      }
      bool same_contract = successor->params.size() == api.params.size();
      for (std::size_t i = 0; same_contract && i < api.params.size(); ++i) {
        same_contract = successor->params[i].name == api.params[i].name && successor->params[i].kind == api.params[i].kind;
      }
      if (!same_contract) v.push_back("'" + api.name + "' changed its parameters without a deprecation");
    }

    const Binding* b0 = base.binding(api.name);
    const Binding* b1 = mutated.binding(successor->name);
    if (!b0 || !b1 || b0->behavior != b1->behavior) {
      v.push_back("'" + api.name + "' is bound to a different behavior after mutation");
      continue;
    }
    if (!base.world) continue;
    for (const auto& slots : detail::probe_slots(b0->behavior, *base.world)) {
      ++report.probes_run;
      KvMap args = detail::probe_args(api, slots);
      auto before = execute(base, api.name, args);
      auto* ok0 = std::get_if<CallResult>(&before);
      if (!ok0) {
        v.push_back("probe " + api.name + render_kv(args) + " fails on the base registry");
        continue;
      }
      KvMap moved = convert_args(args, successor->params);
      auto after = execute(mutated, successor->name, moved);
      auto* ok1 = std::get_if<CallResult>(&after);
      if (!ok1) {
        v.push_back("probe " + successor->name + render_kv(moved) + " fails after mutation");
      } else if (ok0->payload != ok1->payload) {
        v.push_back("probe " + successor->name + render_kv(moved) + " returned a different payload");
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Plain-text config form
//
//   [mutation]
//   seed = 42
//   kinds = name_text, param_format
//   special_char = _
//
//   [synonyms]            ; optional, replaces the shipped table
//   Load = Initialize, Open

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& t : split_condition_terms(text)) out.push_back(t);
  return out;
}

}  // namespace detail

inline MutationPlan plan_from_config(const boost::property_tree::ptree& section,
                                     const boost::property_tree::ptree* synonyms = nullptr) {
  MutationPlan plan;
  if (auto seed = section.get_optional<std::string>("seed")) {
    std::string s(trim(*seed));
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), plan.seed);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      throw MutationError("seed must be an unsigned integer (got '" + s + "')");
    }
  }
  if (auto kinds = section.get_optional<std::string>("kinds")) {
    plan.kinds.clear();
    for (const auto& k : detail::split_list(*kinds)) plan.kinds.insert(mutation_kind_from_string(k));
  }
  std::string special = section.get<std::string>("special_char", "_");
  if (special.size() != 1 || !is_special_char(special[0])) {
    throw MutationError("special_char must be one of _ - . (got '" + special + "')");
  }
  plan.special_char = special[0];
  if (synonyms && !synonyms->empty()) {
    plan.synonym_table.clear();
    for (const auto& [word, node] : *synonyms) plan.synonym_table[word] = detail::split_list(node.data());
  }
  return plan;
}

/// Reads a plan from config text with a [mutation] section and an optional
/// [synonyms] section.
inline MutationPlan parse_plan_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ptree_error& e) {
    throw MutationError(std::string("plan config: ") + e.what());
  }
  auto section = tree.get_child_optional("mutation");
  if (!section) throw MutationError("plan config has no [mutation] section");
  auto syn = tree.get_child_optional("synonyms");
  return plan_from_config(*section, syn ? &*syn : nullptr);
}

inline std::string plan_to_config(const MutationPlan& plan) {
  std::ostringstream out;
  out << "[mutation]\nseed = " << plan.seed << "\nkinds = ";
  bool first = true;
  for (auto k : plan.kinds) {
    if (!first) out << ", ";
    first = false;
    out << to_string(k);
  }
  out << "\nspecial_char = " << plan.special_char << "\n\n[synonyms]\n";
  for (const auto& [word, syns] : plan.synonym_table) {
    out << word << " = ";
    for (std::size_t i = 0; i < syns.size(); ++i) out << (i ? ", " : "") << syns[i];
    out << "\n";
  }
  return out.str();
}

}  // namespace tooldrift
