#include "toolrm/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace toolrm {

namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ParamType type) {
  switch (type) {
    case ParamType::String: return "string";
    case ParamType::Integer: return "integer";
    case ParamType::Number: return "number";
    case ParamType::Boolean: return "boolean";
    case ParamType::Array: return "array";
    case ParamType::Object: return "object";
    case ParamType::Dict: return "dict";
  }
  return "string";
}

std::optional<ParamType> param_type_from_string(std::string_view name) {
  if (name == "string" || name == "str") return ParamType::String;
  if (name == "integer" || name == "int") return ParamType::Integer;
  if (name == "number" || name == "float") return ParamType::Number;
  if (name == "boolean" || name == "bool") return ParamType::Boolean;
  if (name == "array" || name == "list" || name == "tuple") return ParamType::Array;
  if (name == "object") return ParamType::Object;
  if (name == "dict") return ParamType::Dict;
  return std::nullopt;
}

const ParamSpec* ToolSpec::find_param(std::string_view param) const {
  for (const auto& [name, spec] : properties) {
    if (name == param) return &spec;
  }
  return nullptr;
}

bool ToolSpec::is_required(std::string_view param) const {
  return std::find(required.begin(), required.end(), param) != required.end();
}

const ToolSpec* ToolCatalog::find(std::string_view name) const {
  for (const auto& tool : tools) {
    if (tool.name == name) return &tool;
  }
  return nullptr;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

std::optional<Role> role_from_string(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  if (name == "tool") return Role::Tool;
  return std::nullopt;
}

std::string_view to_string(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::IncorrectParameterValue: return "IncorrectParameterValue";
    case ErrorClass::IncorrectFunctionName: return "IncorrectFunctionName";
    case ErrorClass::IncorrectNumberOfFunctions: return "IncorrectNumberOfFunctions";
    case ErrorClass::MissingOptionalParameter: return "MissingOptionalParameter";
    case ErrorClass::MissingRequiredParameter: return "MissingRequiredParameter";
    case ErrorClass::IncorrectParameterType: return "IncorrectParameterType";
    case ErrorClass::UnexpectedParameter: return "UnexpectedParameter";
    case ErrorClass::IncorrectOutputFormat: return "IncorrectOutputFormat";
    case ErrorClass::IrrelevanceError: return "IrrelevanceError";
  }
  return "";
}

// Row names of the downstream error-analysis table; the two classes that
// table never lists use the same casing convention.
std::string_view report_label(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::IncorrectParameterValue: return "Incorrect Parameter Value";
    case ErrorClass::IrrelevanceError: return "Irrelevance error";
    case ErrorClass::IncorrectOutputFormat: return "Malformed output syntax";
    case ErrorClass::IncorrectFunctionName: return "Incorrect function name";
    case ErrorClass::MissingOptionalParameter: return "Missing optional parameter";
    case ErrorClass::IncorrectParameterType: return "Incorrect parameter type";
    case ErrorClass::IncorrectNumberOfFunctions: return "Wrong number of functions";
    case ErrorClass::MissingRequiredParameter: return "Missing required parameter";
    case ErrorClass::UnexpectedParameter: return "Unexpected parameter";
  }
  return "";
}

std::optional<ErrorClass> error_class_from_string(std::string_view name) {
  const std::string key = squash(name);
  for (ErrorClass cls : kAllErrorClasses) {
    if (key == squash(to_string(cls)) || key == squash(report_label(cls))) return cls;
  }
  if (key == "incorrectoutputformat" || key == "malformedoutput") {
    return ErrorClass::IncorrectOutputFormat;
  }
  if (key == "irrelevance") return ErrorClass::IrrelevanceError;
  return std::nullopt;
}

const std::vector<Json>* GoldCall::acceptable(std::string_view param) const {
  for (const auto& [name, values] : arguments) {
    if (name == param) return &values;
  }
  return nullptr;
}

GoldAnswer gold_from_sequence(const ToolCallSequence& seq) {
  GoldAnswer gold;
  for (const auto& call : seq.calls) {
    GoldCall g;
    g.name = call.name;
    for (auto it = call.arguments.begin(); it != call.arguments.end(); ++it) {
      g.arguments.emplace_back(it.key(), std::vector<Json>{it.value()});
    }
    gold.calls.push_back(std::move(g));
  }
  return gold;
}

std::string_view to_string(Slice slice) {
  switch (slice) {
    case Slice::SingleTurn: return "single";
    case Slice::MultiTurn: return "multi";
    case Slice::Irrelevance: return "irrelevance";
  }
  return "single";
}

std::optional<Slice> slice_from_string(std::string_view name) {
  if (name == "single" || name == "single_turn") return Slice::SingleTurn;
  if (name == "multi" || name == "multi_turn") return Slice::MultiTurn;
  if (name == "irrel" || name == "irrelevance") return Slice::Irrelevance;
  return std::nullopt;
}

}  // namespace toolrm
