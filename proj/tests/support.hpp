#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "toolrm/codec.hpp"
#include "toolrm/json.hpp"
#include "toolrm/records.hpp"
#include "toolrm/types.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(TOOLRM_FIXTURES) / name; }

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::mt19937_64 gen{std::random_device{}()};
    path = std::filesystem::temp_directory_path() / ("toolrm-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline toolrm::Json J(const char* text) { return toolrm::Json::parse(text); }

/// Weather/currency catalog used across unit tests.
inline toolrm::ToolCatalog small_catalog() {
  return toolrm::catalog_from_json(J(R"([
    {"name": "get_weather", "description": "Weather for a city.",
     "parameters": {"type": "dict", "properties": {
        "city": {"type": "string", "description": "City."},
        "unit": {"type": "string", "enum": ["celsius", "fahrenheit"], "description": "Unit."},
        "days": {"type": "integer", "description": "Days."}},
      "required": ["city"]}},
    {"name": "convert_currency", "description": "Convert money.",
     "parameters": {"type": "dict", "properties": {
        "amount": {"type": "number", "description": "Amount."},
        "source": {"type": "string", "description": "From."},
        "target": {"type": "string", "description": "To."}},
      "required": ["amount", "source", "target"]}}
  ])"));
}

inline toolrm::ScoringContext small_context(const std::string& query = "Weather in Paris?") {
  return toolrm::make_context(small_catalog(), {{toolrm::Role::User, query}});
}

inline toolrm::ToolCallSequence seq(const char* text) { return toolrm::sequence_from_json(J(text)); }

}  // namespace testing
