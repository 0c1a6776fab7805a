#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "toolrm/types.hpp"

namespace toolrm {

enum class ViolationKind { UnknownFunction, MissingRequired, UnexpectedParam, TypeMismatch, EnumViolation };

inline constexpr ViolationKind kAllViolationKinds[] = {
    ViolationKind::UnknownFunction, ViolationKind::MissingRequired, ViolationKind::UnexpectedParam,
    ViolationKind::TypeMismatch, ViolationKind::EnumViolation,
};

std::string_view to_string(ViolationKind kind);

struct SchemaViolation {
  ViolationKind kind;
  std::size_t call_index = 0;
  std::string function;
  /// Empty for UnknownFunction.
  std::string param;
  std::string detail;
};

/// True when `value` conforms to the declared type (integers must be integral,
/// "number" accepts any number, arrays check their item spec recursively).
bool conforms_to_type(const Json& value, const ParamSpec& spec);

/// True when `value` is in the enum list (canonical comparison) or the spec has no enum.
/// For arrays with an enum item spec every element is checked.
bool conforms_to_enum(const Json& value, const ParamSpec& spec);

/// Structural conformance of a wellformed sequence to the catalog. An empty
/// result means schema-conformant, which is not the same as correct.
/// Violations are ordered by call, then by the kind order above.
std::vector<SchemaViolation> validate_against_catalog(const ToolCallSequence& seq,
                                                      const ToolCatalog& catalog);

}  // namespace toolrm
