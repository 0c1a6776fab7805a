#pragma once

#include <optional>
#include <string>
#include <vector>

#include "support.hpp"
#include "toolrm/codec.hpp"
#include "toolrm/parse.hpp"
#include "toolrm/records.hpp"

namespace testing {

struct TaxonomyCase {
  std::string id;
  toolrm::ScoringContext context;
  toolrm::GoldAnswer gold;
  toolrm::ParsedCandidate candidate;
  /// nullopt when the hand label is "correct".
  std::optional<toolrm::ErrorClass> expected;
};

inline std::vector<TaxonomyCase> load_taxonomy() {
  std::vector<TaxonomyCase> out;
  for (const auto& j : toolrm::read_jsonl(fixture("taxonomy.jsonl"))) {
    TaxonomyCase c;
    c.id = j.at("id").get<std::string>();
    c.context = toolrm::make_context(toolrm::catalog_from_json(j.at("tools")),
                                     toolrm::conversation_from_json(j.at("conversation")));
    c.gold = toolrm::gold_from_json(j.at("gold"));
    const auto& cand = j.at("candidate");
    c.candidate = cand.is_string() ? toolrm::parse_tool_calls(cand.get<std::string>())
                                   : toolrm::ParsedCandidate(toolrm::sequence_from_json(cand));
    const auto label = j.at("expected").get<std::string>();
    if (label != "correct") c.expected = toolrm::error_class_from_string(label);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace testing
