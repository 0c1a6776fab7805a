#include "toolrm/obfuscator.hpp"

#include <set>
#include <string_view>

#include "toolrm/error.hpp"
#include "toolrm/rng.hpp"

namespace toolrm {

namespace {

constexpr std::string_view kLead = "abcdefghijklmnopqrstuvwxyz";
constexpr std::string_view kTail = "abcdefghijklmnopqrstuvwxyz0123456789_";

class NameSource {
 public:
  explicit NameSource(std::uint64_t seed) : rng_(seed) {}

  std::string fresh() {
    for (;;) {
      std::string name = draw();
      if (used_.insert(name).second) return name;
    }
  }

 private:
  std::string draw() {
    const auto length = static_cast<std::size_t>(8 + rng_.below(5));
    std::string name;
    name.reserve(length);
    name.push_back(kLead[rng_.below(kLead.size())]);
    while (name.size() < length) name.push_back(kTail[rng_.below(kTail.size())]);
    return name;
  }

  SplitMix64 rng_;
  std::set<std::string> used_;
};

const std::string& lookup(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw UnmappedName(key);
  return it->second;
}

const std::map<std::string, std::string>& params_of(const ObfuscationMap& map, const std::string& fn) {
  static const std::map<std::string, std::string> kEmpty;
  auto it = map.params.find(fn);
  return it == map.params.end() ? kEmpty : it->second;
}

Json rename_arguments(const Json& args, const std::map<std::string, std::string>& names,
                      const std::string& fn) {
  Json out = Json::object();
  for (auto it = args.begin(); it != args.end(); ++it) {
    auto found = names.find(it.key());
    if (found == names.end()) throw UnmappedName(fn + "." + it.key());
    out[found->second] = it.value();
  }
  return out;
}

template <class T, class Key>
std::vector<T> reorder(std::vector<T> items, const std::vector<std::string>& order, Key key) {
  std::vector<T> out;
  out.reserve(items.size());
  std::vector<bool> taken(items.size(), false);
  for (const auto& name : order) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!taken[i] && key(items[i]) == name) {
        out.push_back(std::move(items[i]));
        taken[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!taken[i]) out.push_back(std::move(items[i]));
  }
  return out;
}

}  // namespace

bool is_obfuscated_name(const std::string& name) {
  if (name.size() < 8 || name.size() > 12) return false;
  if (kLead.find(name[0]) == std::string_view::npos) return false;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (kTail.find(name[i]) == std::string_view::npos) return false;
  }
  return true;
}

ObfuscationMap build_map(const ToolCatalog& catalog, std::uint64_t seed,
                         std::span<const ToolCallSequence> referenced,
                         const ObfuscationOptions& options) {
  ObfuscationMap map;
  map.seed = seed;
  NameSource names(seed);

  for (const auto& tool : catalog.tools) {
    const std::string fn = names.fresh();
    map.functions[tool.name] = fn;
    auto& pm = map.params[tool.name];
    std::vector<std::string> original;
    for (const auto& [param, spec] : tool.properties) {
      pm[param] = names.fresh();
      original.push_back(param);
    }
    std::vector<std::string> shuffled;
    for (const auto& p : original) shuffled.push_back(pm[p]);
    SplitMix64 order_rng(combine_seed(seed, "properties:" + tool.name));
    seeded_shuffle(shuffled, order_rng);
    map.property_order[fn] = std::move(shuffled);
    map.source_property_order[tool.name] = std::move(original);
  }

  for (const auto& seq : referenced) {
    for (const auto& call : seq.calls) {
      if (!map.functions.count(call.name)) map.functions[call.name] = names.fresh();
      auto& pm = map.params[call.name];
      for (auto it = call.arguments.begin(); it != call.arguments.end(); ++it) {
        if (!pm.count(it.key())) pm[it.key()] = names.fresh();
      }
    }
  }

  if (options.shuffle_tools) {
    std::vector<std::string> original;
    std::vector<std::string> shuffled;
    for (const auto& tool : catalog.tools) {
      original.push_back(tool.name);
      shuffled.push_back(map.functions[tool.name]);
    }
    SplitMix64 tool_rng(combine_seed(seed, "tools"));
    seeded_shuffle(shuffled, tool_rng);
    map.tool_order = std::move(shuffled);
    map.source_tool_order = std::move(original);
  }
  return map;
}

ObfuscationMap invert_map(const ObfuscationMap& map) {
  ObfuscationMap inv;
  inv.seed = map.seed;
  for (const auto& [from, to] : map.functions) inv.functions[to] = from;
  for (const auto& [fn, pm] : map.params) {
    auto& target = inv.params[lookup(map.functions, fn)];
    for (const auto& [from, to] : pm) target[to] = from;
  }
  inv.property_order = map.source_property_order;
  inv.source_property_order = map.property_order;
  inv.tool_order = map.source_tool_order;
  inv.source_tool_order = map.tool_order;
  return inv;
}

ToolCatalog apply_map(const ToolCatalog& catalog, const ObfuscationMap& map) {
  ToolCatalog out;
  for (const auto& tool : catalog.tools) {
    ToolSpec t = tool;
    t.name = lookup(map.functions, tool.name);
    const auto& pm = params_of(map, tool.name);
    for (auto& [param, spec] : t.properties) param = lookup(pm, param);
    for (auto& r : t.required) r = lookup(pm, r);
    if (auto it = map.property_order.find(t.name); it != map.property_order.end()) {
      t.properties = reorder(std::move(t.properties), it->second,
                             [](const auto& p) -> const std::string& { return p.first; });
    }
    out.tools.push_back(std::move(t));
  }
  if (map.tool_order) {
    out.tools = reorder(std::move(out.tools), *map.tool_order,
                        [](const ToolSpec& t) -> const std::string& { return t.name; });
  }
  return out;
}

ToolCallSequence apply_map(const ToolCallSequence& seq, const ObfuscationMap& map) {
  ToolCallSequence out;
  for (const auto& call : seq.calls) {
    const std::string& fn = lookup(map.functions, call.name);
    out.calls.push_back({fn, rename_arguments(call.arguments, params_of(map, call.name), call.name)});
  }
  return out;
}

GoldAnswer apply_map(const GoldAnswer& gold, const ObfuscationMap& map) {
  GoldAnswer out;
  for (const auto& call : gold.calls) {
    GoldCall g;
    g.name = lookup(map.functions, call.name);
    const auto& pm = params_of(map, call.name);
    for (const auto& [param, values] : call.arguments) {
      auto it = pm.find(param);
      if (it == pm.end()) throw UnmappedName(call.name + "." + param);
      g.arguments.emplace_back(it->second, values);
    }
    for (const auto& opt : call.optional_params) g.optional_params.insert(lookup(pm, opt));
    out.calls.push_back(std::move(g));
  }
  return out;
}

ParsedCandidate apply_map(const ParsedCandidate& candidate, const ObfuscationMap& map) {
  if (!candidate.wellformed()) return candidate;
  return apply_map(candidate.sequence(), map);
}

ObfuscationSample apply_map(const ObfuscationSample& sample, const ObfuscationMap& map) {
  ObfuscationSample out;
  out.context.catalog = apply_map(sample.context.catalog, map);
  out.context.conversation = sample.context.conversation;
  for (const auto& s : sample.sequences) out.sequences.push_back(apply_map(s, map));
  for (const auto& g : sample.golds) out.golds.push_back(apply_map(g, map));
  return out;
}

Json map_to_json(const ObfuscationMap& map) {
  Json j = Json::object();
  j["seed"] = map.seed;
  j["functions"] = map.functions;
  j["params"] = map.params;
  j["property_order"] = map.property_order;
  j["source_property_order"] = map.source_property_order;
  j["tool_order"] = map.tool_order ? Json(*map.tool_order) : Json(nullptr);
  j["source_tool_order"] = map.source_tool_order ? Json(*map.source_tool_order) : Json(nullptr);
  return j;
}

ObfuscationMap map_from_json(const Json& j) {
  try {
    ObfuscationMap map;
    map.seed = j.at("seed").get<std::uint64_t>();
    map.functions = j.at("functions").get<std::map<std::string, std::string>>();
    map.params = j.at("params").get<std::map<std::string, std::map<std::string, std::string>>>();
    map.property_order = j.at("property_order").get<std::map<std::string, std::vector<std::string>>>();
    map.source_property_order =
        j.at("source_property_order").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("tool_order") && !j.at("tool_order").is_null()) {
      map.tool_order = j.at("tool_order").get<std::vector<std::string>>();
    }
    if (j.contains("source_tool_order") && !j.at("source_tool_order").is_null()) {
      map.source_tool_order = j.at("source_tool_order").get<std::vector<std::string>>();
    }
    return map;
  } catch (const Json::exception& e) {
    throw UsageError(std::string("invalid obfuscation map: ") + e.what());
  }
}

}  // namespace toolrm
