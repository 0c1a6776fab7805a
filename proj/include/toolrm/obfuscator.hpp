#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toolrm/json.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

/// Seeded bijective renaming of function and parameter names.
///
/// `property_order` holds, per function (keyed by its *new* name), the order
/// the renamed properties take in the schema; `source_property_order` keeps
/// the original order keyed by the old name. Inversion swaps the two, so
/// apply followed by inverse apply is the identity on catalogs. The tool
/// order pair does the same for the catalog itself when tool shuffling is on.
struct ObfuscationMap {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> functions;
  std::map<std::string, std::map<std::string, std::string>> params;
  std::map<std::string, std::vector<std::string>> property_order;
  std::map<std::string, std::vector<std::string>> source_property_order;
  std::optional<std::vector<std::string>> tool_order;
  std::optional<std::vector<std::string>> source_tool_order;

  bool empty() const { return functions.empty() && params.empty(); }
  friend bool operator==(const ObfuscationMap&, const ObfuscationMap&) = default;
};

struct ObfuscationOptions {
  /// Also permute the order of tools within the catalog.
  bool shuffle_tools = false;
};

/// Generated names match [a-z][a-z0-9_]{7,11}.
bool is_obfuscated_name(const std::string& name);

/// Maps every function and parameter of the catalog, then every name that
/// `referenced` sequences use but the catalog lacks (hallucinated functions,
/// undeclared parameters), in order of appearance. Deterministic in
/// (names, seed); collisions are resolved by redrawing.
ObfuscationMap build_map(const ToolCatalog& catalog, std::uint64_t seed,
                         std::span<const ToolCallSequence> referenced = {},
                         const ObfuscationOptions& options = {});

ObfuscationMap invert_map(const ObfuscationMap& map);

/// Everything that carries names structurally. Conversation text is carried
/// through untouched.
struct ObfuscationSample {
  ScoringContext context;
  std::vector<ToolCallSequence> sequences;
  std::vector<GoldAnswer> golds;
};

/// Renames catalog, sequences and golds; reorders schema properties (and
/// tools, if the map carries a tool order). Descriptions, enum values,
/// argument values and messages are unchanged. Throws UnmappedName.
ObfuscationSample apply_map(const ObfuscationSample& sample, const ObfuscationMap& map);

ToolCatalog apply_map(const ToolCatalog& catalog, const ObfuscationMap& map);
ToolCallSequence apply_map(const ToolCallSequence& seq, const ObfuscationMap& map);
GoldAnswer apply_map(const GoldAnswer& gold, const ObfuscationMap& map);
ParsedCandidate apply_map(const ParsedCandidate& candidate, const ObfuscationMap& map);

Json map_to_json(const ObfuscationMap& map);
ObfuscationMap map_from_json(const Json& j);

}  // namespace toolrm
