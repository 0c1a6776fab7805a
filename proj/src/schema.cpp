#include "toolrm/schema.hpp"

namespace toolrm {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnknownFunction: return "UnknownFunction";
    case ViolationKind::MissingRequired: return "MissingRequired";
    case ViolationKind::UnexpectedParam: return "UnexpectedParam";
    case ViolationKind::TypeMismatch: return "TypeMismatch";
    case ViolationKind::EnumViolation: return "EnumViolation";
  }
  return "";
}

bool conforms_to_type(const Json& value, const ParamSpec& spec) {
  switch (spec.type) {
    case ParamType::String: return value.is_string();
    case ParamType::Integer: return is_integral_number(value);
    case ParamType::Number: return value.is_number();
    case ParamType::Boolean: return value.is_boolean();
    case ParamType::Object:
    case ParamType::Dict: return value.is_object();
    case ParamType::Array:
      if (!value.is_array()) return false;
      if (spec.item_spec) {
        for (const auto& item : value) {
          if (!conforms_to_type(item, *spec.item_spec)) return false;
        }
      }
      return true;
  }
  return false;
}

bool conforms_to_enum(const Json& value, const ParamSpec& spec) {
  if (spec.enum_values) {
    const std::string key = canonical_dump(value);
    for (const auto& allowed : *spec.enum_values) {
      if (canonical_dump(allowed) == key) return true;
    }
    return false;
  }
  if (spec.item_spec && value.is_array()) {
    for (const auto& item : value) {
      if (!conforms_to_enum(item, *spec.item_spec)) return false;
    }
  }
  return true;
}

std::vector<SchemaViolation> validate_against_catalog(const ToolCallSequence& seq,
                                                      const ToolCatalog& catalog) {
  std::vector<SchemaViolation> out;
  for (std::size_t i = 0; i < seq.calls.size(); ++i) {
    const ToolCall& call = seq.calls[i];
    const ToolSpec* tool = catalog.find(call.name);
    if (!tool) {
      out.push_back({ViolationKind::UnknownFunction, i, call.name, {},
                     "function " + call.name + " is not in the catalog"});
      continue;
    }
    for (const auto& req : tool->required) {
      if (!call.arguments.contains(req)) {
        out.push_back({ViolationKind::MissingRequired, i, call.name, req,
                       "required parameter " + req + " is missing"});
      }
    }
    for (auto it = call.arguments.begin(); it != call.arguments.end(); ++it) {
      if (!tool->find_param(it.key())) {
        out.push_back({ViolationKind::UnexpectedParam, i, call.name, it.key(),
                       "parameter " + it.key() + " is not declared"});
      }
    }
    for (auto it = call.arguments.begin(); it != call.arguments.end(); ++it) {
      const ParamSpec* spec = tool->find_param(it.key());
      if (spec && !conforms_to_type(it.value(), *spec)) {
        out.push_back({ViolationKind::TypeMismatch, i, call.name, it.key(),
                       "parameter " + it.key() + " expects " + std::string(to_string(spec->type)) +
                           ", got " + it.value().dump()});
      }
    }
    for (auto it = call.arguments.begin(); it != call.arguments.end(); ++it) {
      const ParamSpec* spec = tool->find_param(it.key());
      if (spec && conforms_to_type(it.value(), *spec) && !conforms_to_enum(it.value(), *spec)) {
        out.push_back({ViolationKind::EnumViolation, i, call.name, it.key(),
                       "parameter " + it.key() + " value " + it.value().dump() +
                           " is outside its enum"});
      }
    }
  }
  return out;
}

}  // namespace toolrm
