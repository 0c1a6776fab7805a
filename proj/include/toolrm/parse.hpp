#pragma once

#include <string>
#include <string_view>

#include "toolrm/types.hpp"

namespace toolrm {

/// Extracts a tool-call list from raw model output.
///
/// Fenced blocks (```json ... ``` or ``` ... ```) are tried first; without
/// fences the whole trimmed text is tried, then the span from the first '['
/// to the last ']'. The result is wellformed only when exactly one candidate
/// parses as a JSON array in an accepted call syntax. Everything else,
/// including two competing call lists, is a MalformedOutput carrying the
/// first diagnostic.
ParsedCandidate parse_tool_calls(std::string_view text);

/// Sorts argument keys at every depth and folds integral numbers (5.0 -> 5).
/// Call order is preserved. Idempotent.
ToolCallSequence canonicalize(const ToolCallSequence& seq);

/// Compact canonical JSON (syntax a); equal strings iff canonically equal sequences.
std::string canonical_key(const ToolCallSequence& seq);

bool canonical_equal(const ToolCallSequence& a, const ToolCallSequence& b);

/// Listing-style fenced block:
///   ```json
///   [
///           {"fn": {"a": 1}}
///   ]
///   ```
/// An empty sequence renders as "```json\n[]\n```".
std::string render_sequence(const ToolCallSequence& seq);

}  // namespace toolrm
