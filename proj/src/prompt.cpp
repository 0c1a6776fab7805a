#include "toolrm/prompt.hpp"

#include "toolrm/codec.hpp"
#include "toolrm/error.hpp"
#include "toolrm/parse.hpp"
#include "toolrm_templates.inc"

namespace toolrm {

std::string_view prompt_template(std::string_view id) {
  if (id == kRewardTemplateId) return templates::kRewardPromptV1;
  if (id == kJudgeTemplateId) return templates::kJudgePairwiseV1;
  throw UsageError("unknown prompt template: " + std::string(id));
}

std::string substitute(std::string_view tmpl,
                       std::initializer_list<std::pair<std::string_view, std::string_view>> values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    bool replaced = false;
    for (const auto& [name, value] : values) {
      if (tmpl.compare(open + 1, name.size(), name) == 0 && open + 1 + name.size() < tmpl.size() &&
          tmpl[open + 1 + name.size()] == '}') {
        out.append(tmpl.substr(pos, open - pos));
        out.append(value);
        pos = open + name.size() + 2;
        replaced = true;
        break;
      }
    }
    if (!replaced) {
      out.append(tmpl.substr(pos, open + 1 - pos));
      pos = open + 1;
    }
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string render_tool_block(const ToolCatalog& catalog) {
  if (catalog.tools.empty()) return "```json\n[]\n```";
  std::string out = "```json\n[\n";
  for (std::size_t i = 0; i < catalog.tools.size(); ++i) {
    out += "        ";
    out += spaced_dump(tool_to_json(catalog.tools[i]));
    if (i + 1 < catalog.tools.size()) out += ",";
    out += "\n";
  }
  return out + "]\n```";
}

std::string render_conversation(const std::vector<Message>& conversation) {
  std::string out;
  for (const auto& m : conversation) {
    out += "<|im_start|>";
    out += to_string(m.role);
    out += "\n";
    out += m.content;
    out += "<|im_end|>\n";
  }
  return out;
}

namespace {

std::string render_candidate(const ParsedCandidate& c) {
  return c.wellformed() ? render_sequence(c.sequence()) : c.malformed().raw_text;
}

std::string plain_conversation(const std::vector<Message>& conversation) {
  std::string out;
  for (std::size_t i = 0; i < conversation.size(); ++i) {
    if (i) out += "\n";
    out += to_string(conversation[i].role);
    out += ": ";
    out += conversation[i].content;
  }
  return out;
}

std::string inline_candidate(const ParsedCandidate& c) {
  return c.wellformed() ? spaced_dump(sequence_to_json(c.sequence())) : c.malformed().raw_text;
}

}  // namespace

std::string render_reward_prompt(const ScoringContext& context, const ParsedCandidate& candidate) {
  const std::string tools = render_tool_block(context.catalog);
  const std::string conversation = render_conversation(context.conversation);
  const std::string cand = render_candidate(candidate);
  return substitute(prompt_template(kRewardTemplateId),
                    {{"tool-library", tools}, {"conversation", conversation}, {"candidate", cand}});
}

std::string render_judge_prompt(const ScoringContext& context, const ParsedCandidate& first,
                                const ParsedCandidate& second) {
  const std::string tools = spaced_dump(catalog_to_json(context.catalog));
  const std::string query = plain_conversation(context.conversation);
  const std::string a = inline_candidate(first);
  const std::string b = inline_candidate(second);
  return substitute(prompt_template(kJudgeTemplateId),
                    {{"tool-library", tools}, {"query", query}, {"response-A", a}, {"response-B", b}});
}

}  // namespace toolrm
