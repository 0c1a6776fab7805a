#include "toolrm/reranker.hpp"

#include <limits>
#include <unordered_map>

#include "toolrm/error.hpp"

namespace toolrm {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::BestOfN: return "best_of_n";
    case Strategy::Majority: return "majority";
    case Strategy::Greedy: return "greedy";
  }
  return "best_of_n";
}

std::optional<Strategy> strategy_from_string(const std::string& name) {
  if (name == "best_of_n") return Strategy::BestOfN;
  if (name == "majority") return Strategy::Majority;
  if (name == "greedy") return Strategy::Greedy;
  return std::nullopt;
}

std::size_t argmax_lowest(std::span<const std::optional<double>> rewards) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!rewards[i]) continue;
    if (!found || *rewards[i] > best_value) {
      best = i;
      best_value = *rewards[i];
      found = true;
    }
  }
  return best;
}

BestOfNChoice best_of_n(std::span<const ParsedCandidate> candidates, const ScorerBackend& backend,
                        const ScoringContext& context, FailureMode mode) {
  if (candidates.empty()) throw UsageError("best_of_n: no candidates");
  BestOfNChoice choice;
  if (const auto* judge = std::get_if<JudgeBackend>(&backend)) {
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      try {
        if (judge_pair(*judge, context, candidates[choice.index], candidates[i]).preferred == Choice::B) {
          choice.index = i;
        }
      } catch (const std::exception& e) {
        if (mode == FailureMode::Strict) throw;
        choice.errors.push_back({i, e.what()});
      }
    }
    return choice;
  }
  std::vector<ScoreItem> items;
  items.reserve(candidates.size());
  for (const auto& c : candidates) items.push_back({std::cref(context), std::cref(c)});
  BatchScores scores = score_batch(backend, items, mode);
  choice.index = argmax_lowest(scores.rewards);
  choice.rewards = std::move(scores.rewards);
  choice.errors = std::move(scores.errors);
  return choice;
}

std::size_t majority_vote(std::span<const ParsedCandidate> candidates) {
  if (candidates.empty()) throw UsageError("majority_vote: no candidates");
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::size_t> first_index;
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto [it, inserted] = group_of.try_emplace(candidate_key(candidates[i]), first_index.size());
    if (inserted) {
      first_index.push_back(i);
      sizes.push_back(0);
    }
    ++sizes[it->second];
  }
  // Groups are numbered by first occurrence, so a strict comparison keeps the earliest on ties.
  std::size_t best = 0;
  for (std::size_t g = 1; g < sizes.size(); ++g) {
    if (sizes[g] > sizes[best]) best = g;
  }
  return first_index[best];
}

std::size_t greedy(std::span<const ParsedCandidate> candidates) {
  if (candidates.empty()) throw UsageError("greedy: no candidates");
  return 0;
}

}  // namespace toolrm
