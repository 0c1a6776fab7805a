#pragma once

#include <string>

#include "toolrm/json.hpp"
#include "toolrm/types.hpp"

namespace toolrm {

// Conversions between domain types and their JSON forms. The *_from_json
// functions throw UsageError with a field-bearing message on schema violations;
// record loaders prefix the line number.

ParamSpec param_from_json(const Json& j);
Json param_to_json(const ParamSpec& p);

/// Listing-style tool schema:
/// {"name","description","parameters":{"type":"dict","properties":{..},"required":[..]}}.
ToolSpec tool_from_json(const Json& j);
Json tool_to_json(const ToolSpec& tool);

ToolCatalog catalog_from_json(const Json& j);
Json catalog_to_json(const ToolCatalog& catalog);

std::vector<Message> conversation_from_json(const Json& j);
Json conversation_to_json(const std::vector<Message>& conversation);

/// Validates the context invariants: nonempty conversation ending in a user or
/// tool turn.
ScoringContext make_context(ToolCatalog catalog, std::vector<Message> conversation);

/// Accepts either call syntax per element: {fn: {args}} or {"name", "arguments"}.
/// "arguments" may be an object or a string holding a JSON object.
ToolCallSequence sequence_from_json(const Json& j);

/// Syntax (a): [{fn: {args}}, ...].
Json sequence_to_json(const ToolCallSequence& seq);

/// Syntax (b), used on the scoring wire: [{"name": fn, "arguments": {args}}, ...].
Json sequence_to_wire(const ToolCallSequence& seq);

/// Wellformed candidates serialize as a syntax-(a) array, malformed ones as
/// their raw text string.
Json candidate_to_json(const ParsedCandidate& candidate);
ParsedCandidate candidate_from_json(const Json& j);

/// Gold form: [{fn: {param: [acceptable, ...]}}]. The empty string inside an
/// acceptable list marks the parameter optional and is removed from the list.
GoldAnswer gold_from_json(const Json& j);
Json gold_to_json(const GoldAnswer& gold);

}  // namespace toolrm
