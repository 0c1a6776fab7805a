#pragma once

#include <string>

#include <json.hpp>

namespace toolrm {

/// Insertion-ordered JSON; argument maps and schemas keep the order they were read in.
using Json = nlohmann::ordered_json;

/// Recursively sorts object keys and folds integral numbers to int64
/// (5.0 -> 5, unsigned -> signed when it fits, -0.0 -> 0).
Json canonical_value(const Json& value);

/// Compact serialization of canonical_value(value). Two values are canonically
/// equal iff their canonical dumps are equal.
std::string canonical_dump(const Json& value);

bool canonical_equal(const Json& a, const Json& b);

/// Serialization with ", " and ": " separators, matching Python's json.dumps
/// with ensure_ascii=False. Used for prompt rendering.
std::string spaced_dump(const Json& value);

/// Coarse JSON kind used for type comparisons: numbers of either flavour share a kind.
enum class JsonKind { Null, Boolean, Number, String, Array, Object };

JsonKind kind_of(const Json& value);

bool is_integral_number(const Json& value);

}  // namespace toolrm
