#pragma once

#include <string>
#include <string_view>
#include <initializer_list>
#include <utility>
#include <vector>

#include "toolrm/types.hpp"

namespace toolrm {

inline constexpr std::string_view kRewardTemplateId = "reward_prompt_v1";
inline constexpr std::string_view kJudgeTemplateId = "judge_pairwise_v1";

/// Raw template text by id; throws UsageError for unknown ids.
std::string_view prompt_template(std::string_view id);

/// Substitutes every `{name}` occurrence; unknown placeholders stay as-is.
std::string substitute(std::string_view tmpl,
                       std::initializer_list<std::pair<std::string_view, std::string_view>> values);

/// Tools as a fenced JSON list with one schema per line.
std::string render_tool_block(const ToolCatalog& catalog);

/// Chat-markup rendering of the conversation: "<|im_start|>role\ncontent<|im_end|>\n" per turn.
std::string render_conversation(const std::vector<Message>& conversation);

/// Reward-model input: system preamble with the tool block, the
/// conversation, then the candidate as the assistant turn. Malformed
/// candidates appear as their raw text.
std::string render_reward_prompt(const ScoringContext& context, const ParsedCandidate& candidate);

/// Pairwise judge prompt with the two responses in presentation order.
std::string render_judge_prompt(const ScoringContext& context, const ParsedCandidate& first,
                                const ParsedCandidate& second);

}  // namespace toolrm
