#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "toolrm/json.hpp"

namespace toolrm {

// ---------------------------------------------------------------------------
// Tool catalog
// ---------------------------------------------------------------------------

enum class ParamType { String, Integer, Number, Boolean, Array, Object, Dict };

std::string_view to_string(ParamType type);

/// Accepts the closed set plus common aliases found in public datasets
/// ("float", "int", "bool", "list", "tuple", "str"). Returns nullopt otherwise.
std::optional<ParamType> param_type_from_string(std::string_view name);

struct ParamSpec {
  ParamType type = ParamType::String;
  std::string description;
  std::optional<std::vector<Json>> enum_values;
  std::shared_ptr<const ParamSpec> item_spec;
  /// Schema fields not modeled above ("default", "format", nested "properties", ...).
  Json extra = Json::object();
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, ParamSpec>> properties;
  std::vector<std::string> required;
  /// "dict" (Listing-style) or "object".
  std::string parameters_type = "dict";
  Json parameters_extra = Json::object();
  Json extra = Json::object();

  const ParamSpec* find_param(std::string_view param) const;
  bool is_required(std::string_view param) const;
};

struct ToolCatalog {
  std::vector<ToolSpec> tools;

  const ToolSpec* find(std::string_view name) const;
};

// ---------------------------------------------------------------------------
// Conversation
// ---------------------------------------------------------------------------

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

struct Message {
  Role role = Role::User;
  std::string content;
};

struct ScoringContext {
  ToolCatalog catalog;
  std::vector<Message> conversation;
};

// ---------------------------------------------------------------------------
// Tool calls
// ---------------------------------------------------------------------------

struct ToolCall {
  std::string name;
  Json arguments = Json::object();
};

struct ToolCallSequence {
  std::vector<ToolCall> calls;

  bool empty() const { return calls.empty(); }
  std::size_t size() const { return calls.size(); }
};

struct MalformedOutput {
  std::string raw_text;
  std::string diagnostic;
};

/// Output of parsing raw model text: a wellformed sequence or a malformed record.
class ParsedCandidate {
 public:
  ParsedCandidate() = default;
  ParsedCandidate(ToolCallSequence seq) : value_(std::move(seq)) {}  // NOLINT
  ParsedCandidate(MalformedOutput bad) : value_(std::move(bad)) {}   // NOLINT

  bool wellformed() const { return std::holds_alternative<ToolCallSequence>(value_); }
  const ToolCallSequence& sequence() const { return std::get<ToolCallSequence>(value_); }
  const MalformedOutput& malformed() const { return std::get<MalformedOutput>(value_); }

 private:
  std::variant<ToolCallSequence, MalformedOutput> value_;
};

// ---------------------------------------------------------------------------
// Gold answers and error taxonomy
// ---------------------------------------------------------------------------

enum class ErrorClass {
  IncorrectParameterValue,
  IncorrectFunctionName,
  IncorrectNumberOfFunctions,
  MissingOptionalParameter,
  MissingRequiredParameter,
  IncorrectParameterType,
  UnexpectedParameter,
  IncorrectOutputFormat,
  IrrelevanceError,
};

inline constexpr ErrorClass kAllErrorClasses[] = {
    ErrorClass::IncorrectParameterValue,   ErrorClass::IncorrectFunctionName,
    ErrorClass::IncorrectNumberOfFunctions, ErrorClass::MissingOptionalParameter,
    ErrorClass::MissingRequiredParameter,  ErrorClass::IncorrectParameterType,
    ErrorClass::UnexpectedParameter,       ErrorClass::IncorrectOutputFormat,
    ErrorClass::IrrelevanceError,
};

/// Identifier form, e.g. "IncorrectParameterValue". Used in JSONL records.
std::string_view to_string(ErrorClass cls);

/// Row label used in error-histogram reports, e.g. "Incorrect Parameter Value".
std::string_view report_label(ErrorClass cls);

/// Accepts identifier form, report labels, and the benchmark's table labels
/// (case-insensitive, whitespace-insensitive).
std::optional<ErrorClass> error_class_from_string(std::string_view name);

struct GoldCall {
  std::string name;
  /// Parameter name -> acceptable values. Order follows the gold record.
  std::vector<std::pair<std::string, std::vector<Json>>> arguments;
  /// Parameters that may be omitted by the candidate.
  std::set<std::string> optional_params;

  const std::vector<Json>* acceptable(std::string_view param) const;
};

/// Empty `calls` encodes an irrelevance item: the correct answer is no call.
struct GoldAnswer {
  std::vector<GoldCall> calls;
};

/// Gold with exactly one acceptable value per argument and no optional params.
GoldAnswer gold_from_sequence(const ToolCallSequence& seq);

// ---------------------------------------------------------------------------
// Dataset records
// ---------------------------------------------------------------------------

struct BenchRecord {
  std::string id;
  ScoringContext context;
  ToolCallSequence correct;
  ToolCallSequence incorrect;
  std::optional<ErrorClass> error_type;
  std::optional<std::string> source_model;
};

struct PreferencePair {
  std::string query_id;
  ScoringContext context;
  ToolCallSequence chosen;
  ParsedCandidate rejected;
  std::optional<ErrorClass> rejected_error;
  std::string source_model;
};

struct GenerationOutput {
  std::string source_model;
  std::string raw_text;
  ParsedCandidate candidate;
};

enum class Slice { SingleTurn, MultiTurn, Irrelevance };

std::string_view to_string(Slice slice);
std::optional<Slice> slice_from_string(std::string_view name);

struct GenerationRecord {
  std::string query_id;
  ScoringContext context;
  std::optional<GoldAnswer> gold;
  std::vector<GenerationOutput> outputs;
  std::optional<Slice> slice;
};

struct TaskRecord {
  std::string id;
  ScoringContext context;
  GoldAnswer gold;
};

}  // namespace toolrm
